//! Plain-text PBM/PGM export for inspection or projection.

use std::fmt::Write as _;

use super::Pattern;
use crate::model::WeightImage;

/// ASCII PBM (`P1`), `1` for bright pixels.
pub fn pattern_to_pbm(p: &Pattern) -> String {
    let n = p.n();
    let mut out = format!("P1\n{n} {n}\n");
    for row in p.bits().chunks(n) {
        let line: Vec<&str> = row
            .iter()
            .map(|&b| if b == 1 { "1" } else { "0" })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// ASCII 16-bit PGM (`P2`), pixel `floor(65535 · w_ij / max w)`.
pub fn weights_to_pgm(w: &WeightImage) -> String {
    let n = w.n();
    let max = w.max_weight();
    let mut out = format!("P2\n{n} {n}\n65535\n");
    for i in 0..n {
        let line: Vec<String> = w
            .row(i)
            .iter()
            .map(|&x| {
                if max > 0.0 {
                    ((65535.0 * x / max).floor() as u32).to_string()
                } else {
                    "0".to_string()
                }
            })
            .collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpinVector;
    use crate::spi::pattern_from_spins;

    #[test]
    fn pbm_two_spins() {
        let p = pattern_from_spins(&SpinVector::new(vec![1, -1]).unwrap());
        assert_eq!(pattern_to_pbm(&p), "P1\n2 2\n0 1\n1 0\n");
    }

    #[test]
    fn pgm_scales_to_max() {
        let w = WeightImage::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![2.0, 0.0, 0.5],
            vec![1.0, 0.5, 0.0],
        ])
        .unwrap();
        assert_eq!(
            weights_to_pgm(&w),
            "P2\n3 3\n65535\n0 65535 32767\n65535 0 16383\n32767 16383 0\n"
        );
    }

    #[test]
    fn pgm_all_zero_image() {
        let w = WeightImage::new(2, vec![0.0; 4]).unwrap();
        assert_eq!(weights_to_pgm(&w), "P2\n2 2\n65535\n0 0\n0 0\n");
    }
}
