use nlslab::io::{decode_nlsf, decode_nlsq, encode_nlsf, encode_nlsq, read_series_csv, series_csv};
use nlslab::virial::{VirialRow, VirialSeries};
use nlslab::{solve_ground_state, Error, Field, Grid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen::<f64>() * 1e-300)).collect();
    Field::new(grid, values, rng.gen()).unwrap()
}

#[test]
fn nlsf_round_trip_is_bitwise() {
    for grid in [Grid::periodic(16, 3.7).unwrap(), Grid::radial(100, 20.0).unwrap()] {
        let f = random_field(grid, 7);
        let bytes = encode_nlsf(&f);
        let g = decode_nlsf(&bytes).unwrap();
        assert_eq!(g.grid(), f.grid());
        assert_eq!(g.time().to_bits(), f.time().to_bits());
        for (a, b) in f.values().iter().zip(g.values()) {
            assert_eq!((a.re.to_bits(), a.im.to_bits()), (b.re.to_bits(), b.im.to_bits()));
        }
        assert_eq!(encode_nlsf(&g), bytes);
    }
}

#[test]
fn nlsf_layout() {
    let f = Field::zeros(Grid::radial(4, 2.0).unwrap()).with_time(0.5);
    let bytes = encode_nlsf(&f);
    assert_eq!(&bytes[..4], b"NLSF");
    assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
    assert_eq!(bytes[8], 1);
    assert_eq!(&bytes[9..13], &4u32.to_le_bytes());
    assert_eq!(&bytes[13..21], &2.0f64.to_le_bytes());
    assert_eq!(&bytes[21..29], &0.5f64.to_le_bytes());
    assert_eq!(bytes.len(), 29 + 4 * 16);
}

#[test]
fn nlsf_rejects_version_two() {
    let mut bytes = encode_nlsf(&Field::zeros(Grid::periodic(8, 1.0).unwrap()));
    bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
    assert!(matches!(decode_nlsf(&bytes), Err(Error::VersionMismatch { found: 2, expected: 1 })));
}

#[test]
fn nlsf_rejects_bad_magic() {
    let mut bytes = encode_nlsf(&Field::zeros(Grid::periodic(8, 1.0).unwrap()));
    bytes[0] = b'X';
    assert!(matches!(decode_nlsf(&bytes), Err(Error::BadMagic { .. })));
}

#[test]
fn nlsf_truncation_reports_offset() {
    let bytes = encode_nlsf(&Field::zeros(Grid::periodic(8, 1.0).unwrap()));
    let cut = bytes.len() - 5;
    match decode_nlsf(&bytes[..cut]) {
        Err(Error::Truncated { offset, needed, len }) => {
            assert_eq!(offset, 29);
            assert_eq!(needed, 8 * 8 * 8 * 16);
            assert_eq!(len, cut);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn nlsq_round_trip() {
    for n in [4096, 16384] {
        let q = solve_ground_state(20.0, n, 1e-12).unwrap();
        let text = encode_nlsq(&q);
        assert!(text.starts_with("# nlsq v1\n# rmax="));
        let back = decode_nlsq(&text).unwrap();
        assert_eq!(back.profile(), q.profile());
        assert_eq!(back.profile_norms(), q.profile_norms());
        assert_eq!(encode_nlsq(&back), text);
    }
    let q = solve_ground_state(20.0, 16384, 1e-12).unwrap();
    let back = decode_nlsq(&encode_nlsq(&q)).unwrap();
    for r in [0.0, 0.37, 1.0, 5.5, 19.9] {
        assert!((back.value(r) - q.value(r)).abs() < 1e-8 * q.value(0.0), "r={r}");
    }
}

#[test]
fn nlsq_with_inconsistent_norms_is_rejected() {
    let q = solve_ground_state(20.0, 4096, 1e-12).unwrap();
    let text = encode_nlsq(&q).replacen("# mass_sq=1", "# mass_sq=2", 1);
    assert!(matches!(decode_nlsq(&text), Err(Error::Malformed(_))));
}

#[test]
fn nlsq_errors_carry_line_numbers() {
    let q = solve_ground_state(20.0, 4096, 1e-12).unwrap();
    let text = encode_nlsq(&q).replacen("# rmax=", "# rmx=", 1);
    assert!(matches!(decode_nlsq(&text), Err(Error::ConfigParse { line: 2, .. })));
    let mut lines: Vec<String> = encode_nlsq(&q).lines().map(String::from).collect();
    lines[10] = "0.1 abc".into();
    assert!(matches!(decode_nlsq(&lines.join("\n")), Err(Error::ConfigParse { line: 11, .. })));
}

#[test]
fn csv_uses_the_documented_header_and_17_digits() {
    let row = VirialRow {
        t: 0.1,
        mass: 1.0 / 3.0,
        energy: -2.0,
        momentum: [0.0; 3],
        grad_sq: 3.0,
        l4_4: 4.0,
        eta: 0.5,
        variance: f64::NAN,
        rprime: 0.0,
        z_r: 1.5,
        eta_geq_r: 0.25,
        a_r_bound: 1e-300,
    };
    let text = series_csv(&VirialSeries { radius: Some(2.0), rows: vec![row, row] });
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,mass,energy,grad_sq,l4_4,eta,variance,rprime,z_R,eta_geq_R,A_R_bound");
    assert!(lines.next().unwrap().contains("3.3333333333333331e-1"));
    let rows = read_series_csv(&text).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], 1.0 / 3.0);
    assert!(rows[0][6].is_nan());
}
