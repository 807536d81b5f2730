//! Serialization of small complex matrices as separate real/imaginary arrays.

pub mod matrix2 {
    use nalgebra::Matrix2;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Parts {
        re: [[f64; 2]; 2],
        im: [[f64; 2]; 2],
    }

    pub fn serialize<S: Serializer>(m: &Matrix2<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let part = |f: fn(&Complex64) -> f64| [[f(&m[(0, 0)]), f(&m[(0, 1)])], [f(&m[(1, 0)]), f(&m[(1, 1)])]];
        Parts {
            re: part(|c| c.re),
            im: part(|c| c.im),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix2<Complex64>, D::Error> {
        let p = Parts::deserialize(d)?;
        Ok(Matrix2::from_fn(|i, j| Complex64::new(p.re[i][j], p.im[i][j])))
    }
}

pub mod vector2 {
    use nalgebra::Vector2;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Parts {
        re: [f64; 2],
        im: [f64; 2],
    }

    pub fn serialize<S: Serializer>(v: &Vector2<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        Parts {
            re: [v[0].re, v[1].re],
            im: [v[0].im, v[1].im],
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector2<Complex64>, D::Error> {
        let p = Parts::deserialize(d)?;
        Ok(Vector2::new(
            Complex64::new(p.re[0], p.im[0]),
            Complex64::new(p.re[1], p.im[1]),
        ))
    }
}
