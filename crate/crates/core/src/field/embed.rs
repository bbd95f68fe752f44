//! Complex embeddings of field elements as certified intervals.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::FieldElement;
use crate::real::RealApprox;

/// The image of an element under one embedding `K -> C`.
#[derive(Clone, Debug)]
pub enum EmbeddingValue {
    Real(RealApprox),
    Complex { re: RealApprox, im: RealApprox },
}

impl EmbeddingValue {
    pub fn abs(&self) -> RealApprox {
        match self {
            EmbeddingValue::Real(v) => v.abs(),
            EmbeddingValue::Complex { re, im } => (re * re + im * im).sqrt().expect("sum of squares"),
        }
    }
}

fn rat(q: &BigRational, prec: u32) -> RealApprox {
    RealApprox::from_ratio(q, prec)
}

fn ln_abs_rat(q: &BigRational, prec: u32) -> RealApprox {
    rat(&q.abs(), prec).ln().expect("nonzero rational")
}

impl FieldElement {
    fn sqrt_abs_m(&self, prec: u32) -> RealApprox {
        RealApprox::from_int(&self.field().m().abs(), prec)
            .sqrt()
            .expect("positive")
    }

    /// `x + s y sqrt(m)` for a real quadratic field, avoiding cancellation
    /// by dividing the norm by the conjugate image when the two terms have opposite signs.
    fn real_image(&self, s: i8, prec: u32) -> RealApprox {
        let r = self.sqrt_abs_m(prec);
        let sy = if s > 0 { self.y().clone() } else { -self.y().clone() };
        let x = rat(self.x(), prec);
        let cancels = (self.x().is_positive() && sy.is_negative()) || (self.x().is_negative() && sy.is_positive());
        if cancels {
            let other = &x - &(rat(&sy, prec) * &r);
            rat(&self.norm(), prec)
                .checked_div(&other)
                .expect("conjugate image has no cancellation")
        } else {
            x + rat(&sy, prec) * &r
        }
    }

    /// Images under every embedding: one for `Q`, two for quadratic fields
    /// (for imaginary fields, `sqrt m -> +i sqrt|m|` first).
    pub fn embeddings(&self, prec: u32) -> Vec<EmbeddingValue> {
        let f = self.field();
        if f.is_rational() {
            return vec![EmbeddingValue::Real(rat(self.x(), prec))];
        }
        if f.is_imaginary() {
            let re = rat(self.x(), prec);
            let im = rat(self.y(), prec) * self.sqrt_abs_m(prec);
            return vec![
                EmbeddingValue::Complex {
                    re: re.clone(),
                    im: im.clone(),
                },
                EmbeddingValue::Complex { re, im: -im },
            ];
        }
        vec![
            EmbeddingValue::Real(self.real_image(1, prec)),
            EmbeddingValue::Real(self.real_image(-1, prec)),
        ]
    }

    /// `|x^sigma|` for each embedding.
    pub fn abs_embeddings(&self, prec: u32) -> Vec<RealApprox> {
        let f = self.field();
        if f.is_imaginary() {
            let a = rat(&self.norm(), prec).sqrt().expect("norm is positive");
            return vec![a.clone(), a];
        }
        self.embeddings(prec).iter().map(EmbeddingValue::abs).collect()
    }

    /// `log |x^sigma|` for each embedding; `None` for zero.
    pub fn log_abs_embeddings(&self, prec: u32) -> Option<Vec<RealApprox>> {
        if self.is_zero() {
            return None;
        }
        let f = self.field();
        if f.is_rational() {
            return Some(vec![ln_abs_rat(self.x(), prec)]);
        }
        if f.is_imaginary() {
            let half = ln_abs_rat(&self.norm(), prec).mul_pow2(-1);
            return Some(vec![half.clone(), half]);
        }
        let n = self.norm();
        let ln_n = ln_abs_rat(&n, prec);
        if self.y().is_zero() {
            let l = ln_abs_rat(self.x(), prec);
            return Some(vec![l.clone(), l]);
        }
        if self.x().is_zero() {
            let half = ln_abs_rat(&n, prec).mul_pow2(-1);
            return Some(vec![half.clone(), half]);
        }
        // the embedding without cancellation is computed directly; the other from the norm
        let same_sign = self.x().is_positive() == self.y().is_positive();
        let direct = self.real_image(if same_sign { 1 } else { -1 }, prec).abs().ln()?;
        let other = &ln_n - &direct;
        Some(if same_sign { vec![direct, other] } else { vec![other, direct] })
    }

    /// Largest `|x^sigma|`.
    pub fn house(&self, prec: u32) -> RealApprox {
        let v = self.abs_embeddings(prec);
        v.iter().skip(1).fold(v[0].clone(), |a, b| a.max(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_element;

    #[test]
    fn real_embeddings_of_unit() {
        let g = parse_element("1+1*sqrt(2)").unwrap();
        let e = g.abs_embeddings(128);
        assert!((e[0].mid() - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((e[1].mid() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let prod = &e[0] * &e[1];
        assert!(prod.contains(&crate::real::Dyadic::from_int(1)));
        let l = g.log_abs_embeddings(128).unwrap();
        assert!((&l[0] + &l[1]).contains(&crate::real::Dyadic::zero()));
    }

    #[test]
    fn cancellation_is_avoided() {
        // 99 - 70 sqrt 2 is about 0.00505
        let g = parse_element("99-70*sqrt(2)").unwrap();
        let e = g.embeddings(64);
        let EmbeddingValue::Real(v) = &e[0] else { panic!() };
        assert!((v.mid() - (99.0 - 70.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(v.rad() < 1e-20);
    }

    #[test]
    fn imaginary_embeddings_are_conjugate() {
        let g = parse_element("(2,-3,2)+").unwrap();
        let a = g.abs_embeddings(128);
        assert!(a[0].contains(&crate::real::Dyadic::from_int(1)));
        let e = g.embeddings(128);
        let EmbeddingValue::Complex { re, im } = &e[0] else { panic!() };
        assert!((re.mid() - 0.75).abs() < 1e-15);
        assert!((im.mid() - 7f64.sqrt() / 4.0).abs() < 1e-15);
        assert!(e[1].abs().overlaps(&a[1]));
    }

    #[test]
    fn rational_embedding() {
        let g = parse_element("-3/2").unwrap();
        let l = g.log_abs_embeddings(128).unwrap();
        assert_eq!(l.len(), 1);
        assert!((l[0].mid() - 1.5f64.ln()).abs() < 1e-15);
    }
}
