/* tslint:disable */
/* eslint-disable */

export class Lab {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `kind` is `soliton` (`p1 = a`) or `gaussian` (`p1 = A`, `p2 = w`).
     */
    classify(kind: string, p1: number, p2: number): Float64Array;
    etaSeries(kind: string, p1: number, p2: number, t_end: number, dt0: number): Float64Array;
    /**
     * Solves `Q` on `n` radial samples over `[0, 20]`.
     */
    constructor(n: number);
    norms(): Float64Array;
    profile(stride: number): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_lab_free: (a: number, b: number) => void;
    readonly lab_classify: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly lab_etaSeries: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly lab_new: (a: number) => [number, number, number];
    readonly lab_norms: (a: number) => [number, number];
    readonly lab_profile: (a: number, b: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
