#![allow(dead_code)]

use horizon_core::{FieldSpec, HomogeneityType, Monomial};

pub fn mono(c: f64, e: &[f64]) -> Monomial {
    Monomial::new(c, e.to_vec()).unwrap()
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// `y' = y^2`.
pub fn quadratic() -> (FieldSpec, HomogeneityType) {
    let f = FieldSpec::new(names(&["y"]), vec![vec![mono(1.0, &[2.0])]], false).unwrap();
    (f, HomogeneityType::new(vec![1], 1.0).unwrap())
}

/// `chi' = 1, u' = v, v' = 6u^2 + chi`.
pub fn painleve() -> (FieldSpec, HomogeneityType) {
    let f = FieldSpec::new(
        names(&["chi", "u", "v"]),
        vec![
            vec![mono(1.0, &[0.0, 0.0, 0.0])],
            vec![mono(1.0, &[0.0, 0.0, 1.0])],
            vec![mono(6.0, &[0.0, 2.0, 0.0]), mono(1.0, &[1.0, 0.0, 0.0])],
        ],
        true,
    )
    .unwrap();
    (f, HomogeneityType::new(vec![0, 2, 3], 1.0).unwrap())
}

/// Dafermos-profile system for the Keyfitz–Kranser conservation law.
pub fn kk(eps: f64) -> (FieldSpec, HomogeneityType) {
    let e = |v: [f64; 5]| v;
    let mut chi = vec![];
    let mut w1 = vec![];
    let mut w2 = vec![];
    if eps != 0.0 {
        chi.push(mono(eps, &e([0.0; 5])));
        w1.push(mono(-eps, &[0.0, 1.0, 0.0, 0.0, 0.0]));
        w2.push(mono(-eps, &[0.0, 0.0, 1.0, 0.0, 0.0]));
    }
    let f = FieldSpec::new(
        names(&["chi", "u1", "u2", "w1", "w2"]),
        vec![
            chi,
            vec![
                mono(1.0, &[0.0, 2.0, 0.0, 0.0, 0.0]),
                mono(-1.0, &[0.0, 0.0, 1.0, 0.0, 0.0]),
                mono(-1.0, &[1.0, 1.0, 0.0, 0.0, 0.0]),
                mono(-1.0, &[0.0, 0.0, 0.0, 1.0, 0.0]),
            ],
            vec![
                mono(1.0 / 3.0, &[0.0, 3.0, 0.0, 0.0, 0.0]),
                mono(-1.0, &[0.0, 1.0, 0.0, 0.0, 0.0]),
                mono(-1.0, &[1.0, 0.0, 1.0, 0.0, 0.0]),
                mono(-1.0, &[0.0, 0.0, 0.0, 0.0, 1.0]),
            ],
            w1,
            w2,
        ],
        false,
    )
    .unwrap();
    (f, HomogeneityType::new(vec![0, 1, 2, 1, 2], 1.0).unwrap())
}

/// `chi' = 1, u' = u^{1-m} v, v' = -beta chi u^{1-m} v - a u`.
pub fn selfsimilar(m: f64, beta: f64, a: f64) -> (FieldSpec, HomogeneityType) {
    let f = FieldSpec::new(
        names(&["chi", "u", "v"]),
        vec![
            vec![mono(1.0, &[0.0, 0.0, 0.0])],
            vec![mono(1.0, &[0.0, 1.0 - m, 1.0])],
            vec![mono(-beta, &[1.0, 1.0 - m, 1.0]), mono(-a, &[0.0, 1.0, 0.0])],
        ],
        true,
    )
    .unwrap();
    (f, HomogeneityType::new(vec![0, 1, 1], 1.0 - m).unwrap())
}

/// `r' = 1, w' = v, v' = -(n-1)/r v - r^q w^{p+2} + 2 v^2 / w`, p even.
pub fn mems(n: f64, p: f64, q: f64) -> (FieldSpec, HomogeneityType) {
    let f = FieldSpec::new(
        names(&["r", "w", "v"]),
        vec![
            vec![mono(1.0, &[0.0, 0.0, 0.0])],
            vec![mono(1.0, &[0.0, 0.0, 1.0])],
            vec![
                mono(-(n - 1.0), &[-1.0, 0.0, 1.0]),
                mono(-1.0, &[q, p + 2.0, 0.0]),
                mono(2.0, &[0.0, -1.0, 2.0]),
            ],
        ],
        true,
    )
    .unwrap();
    (f, HomogeneityType::new(vec![0, 2, p as u32 + 3], p + 1.0).unwrap())
}
