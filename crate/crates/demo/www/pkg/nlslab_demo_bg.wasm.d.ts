/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_lab_free: (a: number, b: number) => void;
export const lab_classify: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const lab_etaSeries: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const lab_new: (a: number) => [number, number, number];
export const lab_norms: (a: number) => [number, number];
export const lab_profile: (a: number, b: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
