//! Builtin instances with their published parameter sets, embedded at
//! 4-decimal literal precision.

use serde::Serialize;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::Scalar;

use super::gaussian::{GaussianKernel, DEFAULT_BINS};
use super::{ModelError, ObservationKernel, PomdpModel};

/// Precision of the embedded literals.
pub const LITERAL_RESOLUTION: f64 = 1e-4;

/// Row sums further than this from one are renormalized; closer ones have
/// the residual absorbed into the largest entry.
const RENORMALIZE_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
#[error("theta = ({theta1}, {theta2}) outside the admissible region 0 <= theta1 <= theta2 <= 1/2")]
pub struct ThetaError {
    pub theta1: f64,
    pub theta2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum BuiltinExample {
    /// Sampling and measurement control, X = 3, A = 2, Y = 3.
    One,
    /// X = 10, A = 2, discrete Y = 10.
    TwoDiscrete,
    /// X = 10, A = 2, additive Gaussian noise with σ = 1.
    TwoGaussian,
    /// X = 8, A = 8, Y = 8 with tridiagonal observations.
    Three,
    /// X = 3, A = 2, Gaussian noise, `P₂(θ₁, θ₂)`, `P₁ = P₂²`.
    Four { theta1: f64, theta2: f64 },
}

impl BuiltinExample {
    /// Parses `1`, `2`, `2d`, `2-discrete`, `2c`, `2g`, `2-gaussian`, `3`, `4`.
    /// Example 4 takes its θ separately.
    pub fn parse(id: &str, theta: Option<(f64, f64)>) -> Option<Self> {
        let (t1, t2) = theta.unwrap_or((0.0, 0.0));
        match id.trim().to_ascii_lowercase().as_str() {
            "1" => Some(Self::One),
            "2" | "2d" | "2-discrete" => Some(Self::TwoDiscrete),
            "2c" | "2g" | "2-gaussian" => Some(Self::TwoGaussian),
            "3" => Some(Self::Three),
            "4" => Some(Self::Four { theta1: t1, theta2: t2 }),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::One => "1".into(),
            Self::TwoDiscrete => "2-discrete".into(),
            Self::TwoGaussian => "2-gaussian".into(),
            Self::Three => "3".into(),
            Self::Four { theta1, theta2 } => format!("4({theta1},{theta2})"),
        }
    }

    /// Initial belief used for the fixed-prior loss L₁ (0-based state).
    pub fn fixed_prior_state(&self) -> usize {
        match self {
            Self::One => 2,
            Self::TwoDiscrete | Self::TwoGaussian => 4,
            Self::Three | Self::Four { .. } => 0,
        }
    }

    pub fn is_admissible_theta(theta1: f64, theta2: f64) -> bool {
        theta1 >= 0.0 && theta2 >= theta1 && theta2 <= 0.5 && theta1 + theta2 <= 1.0
    }

    /// Builds the model with discount 0.4 (first row of the discount ladder).
    pub fn model<T: Scalar>(&self) -> Result<PomdpModel<T>, ModelError> {
        self.model_with_discount(T::from_f64_lossy(0.4))
    }

    pub fn model_with_discount<T: Scalar>(&self, discount: T) -> Result<PomdpModel<T>, ModelError> {
        let model = match *self {
            Self::One => example1(discount)?,
            Self::TwoDiscrete => {
                let b = ObservationKernel::Discrete(literal(&EX2_B));
                example2(discount, b)?
            }
            Self::TwoGaussian => {
                let g = GaussianKernel::new(10, 1.0, DEFAULT_BINS)?;
                example2(discount, ObservationKernel::Gaussian(g))?
            }
            Self::Three => example3(discount)?,
            Self::Four { theta1, theta2 } => example4(discount, theta1, theta2)?,
        };
        Ok(model.with_entry_resolution(Some(LITERAL_RESOLUTION)))
    }
}

/// Converts a literal stochastic matrix, fixing row sums per the rule above.
fn literal<T: Scalar, const R: usize, const C: usize>(rows: &[[f64; C]; R]) -> Matrix<T> {
    let converted = rows
        .iter()
        .map(|r| {
            let raw_sum: f64 = r.iter().sum();
            let mut row: Vec<T> = if (raw_sum - 1.0).abs() > RENORMALIZE_THRESHOLD {
                let s = T::from_f64_lossy(raw_sum);
                r.iter().map(|&v| T::from_f64_lossy(v) / s.clone()).collect()
            } else {
                r.iter().map(|&v| T::from_f64_lossy(v)).collect()
            };
            absorb_residual(&mut row);
            row
        })
        .collect();
    Matrix::from_rows(converted).expect("rectangular literal")
}

fn absorb_residual<T: Scalar>(row: &mut [T]) {
    let total = crate::scalar::sum(row);
    let mut k = 0;
    for (i, v) in row.iter().enumerate() {
        if *v > row[k] {
            k = i;
        }
    }
    row[k] = row[k].clone() + (T::one() - total);
}

fn cost_matrix<T: Scalar>(by_action: &[&[f64]]) -> Matrix<T> {
    let actions = by_action.len();
    let states = by_action[0].len();
    let mut m = Matrix::zeros(states, actions);
    for (a, col) in by_action.iter().enumerate() {
        for (x, &v) in col.iter().enumerate() {
            m[(x, a)] = T::from_f64_lossy(v);
        }
    }
    m
}

const EX1_P2: [[f64; 3]; 3] = [[1.0000, 0.0000, 0.0000], [0.4677, 0.4149, 0.1174], [0.3302, 0.5220, 0.1478]];

const EX1_B1: [[f64; 3]; 3] = [[0.6373, 0.3405, 0.0222], [0.3118, 0.6399, 0.0483], [0.0422, 0.8844, 0.0734]];

const EX1_B2: [[f64; 3]; 3] = [[0.5927, 0.3829, 0.0244], [0.4986, 0.4625, 0.0389], [0.1395, 0.7900, 0.0705]];

const EX1_C1: [f64; 3] = [1.0000, 1.5045, 1.8341];
const EX1_C2: [f64; 3] = [1.5002, 1.0000, 1.0000];

fn example1<T: Scalar>(discount: T) -> Result<PomdpModel<T>, ModelError> {
    let p2: Matrix<T> = literal(&EX1_P2);
    let p1 = p2.matmul(&p2);
    PomdpModel::new(
        vec![p1, p2],
        vec![ObservationKernel::Discrete(literal(&EX1_B1)), ObservationKernel::Discrete(literal(&EX1_B2))],
        cost_matrix(&[&EX1_C1, &EX1_C2]),
        discount,
    )
}

fn example2<T: Scalar>(discount: T, b: ObservationKernel<T>) -> Result<PomdpModel<T>, ModelError> {
    PomdpModel::new(
        vec![literal(&EX2_P1), literal(&EX2_P2)],
        vec![b],
        cost_matrix(&[&EX2_COSTS_BY_ACTION[0], &EX2_COSTS_BY_ACTION[1]]),
        discount,
    )
}

/// Tridiagonal observation matrix `Υ_ε`: `ε` on the diagonal, `1 − ε` on the
/// single off-diagonal of the two boundary rows, `(1 − ε)/2` on both
/// off-diagonals of interior rows.
pub fn tridiagonal_kernel<T: Scalar>(num_states: usize, eps: T) -> Matrix<T> {
    let mut m = Matrix::zeros(num_states, num_states);
    let one_minus = T::one() - eps.clone();
    let half = one_minus.clone() / T::from_f64_lossy(2.0);
    for i in 0..num_states {
        m[(i, i)] = eps.clone();
        if i == 0 {
            m[(0, 1)] = one_minus.clone();
        } else if i == num_states - 1 {
            m[(i, i - 1)] = one_minus.clone();
        } else {
            m[(i, i - 1)] = half.clone();
            m[(i, i + 1)] = half.clone();
        }
    }
    m
}

fn example3<T: Scalar>(discount: T) -> Result<PomdpModel<T>, ModelError> {
    let transitions = vec![
        literal(&EX3_P1),
        literal(&EX3_P2),
        literal(&EX3_P3),
        literal(&EX3_P4),
        literal(&EX3_P5),
        literal(&EX3_P6),
        literal(&EX3_P7),
        literal(&EX3_P8),
    ];
    let costs =
        Matrix::from_rows(EX3_COSTS.iter().map(|r| r.iter().map(|&v| T::from_f64_lossy(v)).collect()).collect())
            .expect("rectangular");
    let b = tridiagonal_kernel(8, T::from_f64_lossy(0.7));
    PomdpModel::new(transitions, vec![ObservationKernel::Discrete(b)], costs, discount)
}

/// `P₂(θ₁, θ₂)` of Example 4.
pub fn example4_p2<T: Scalar>(theta1: T, theta2: T) -> Matrix<T> {
    let two = T::from_f64_lossy(2.0);
    let mut m = Matrix::zeros(3, 3);
    m[(0, 0)] = T::one();
    m[(1, 0)] = T::one() - two.clone() * theta1.clone();
    m[(1, 1)] = theta1.clone();
    m[(1, 2)] = theta1;
    m[(2, 0)] = T::one() - two * theta2.clone();
    m[(2, 1)] = theta2.clone();
    m[(2, 2)] = theta2;
    m
}

fn example4<T: Scalar>(discount: T, theta1: f64, theta2: f64) -> Result<PomdpModel<T>, ModelError> {
    if !BuiltinExample::is_admissible_theta(theta1, theta2) {
        return Err(ThetaError { theta1, theta2 }.into());
    }
    let p2 = example4_p2(T::from_f64_lossy(theta1), T::from_f64_lossy(theta2));
    let p1 = p2.matmul(&p2);
    let g = GaussianKernel::new(3, 1.0, DEFAULT_BINS)?;
    PomdpModel::new(
        vec![p1, p2],
        vec![ObservationKernel::Gaussian(g)],
        cost_matrix(&[&[1.0, 1.1, 1.2], &[1.2, 1.1, 1.1]]),
        discount,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn example1_shape_and_costs() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        assert_eq!((m.num_states(), m.num_actions(), m.num_observations()), (3, 2, 3));
        assert_eq!(m.cost_vector(1), vec![1.5002, 1.0, 1.0]);
        assert_eq!(m.cost_vector(0), vec![1.0, 1.5045, 1.8341]);
    }

    #[test]
    fn example1_p1_is_square_of_p2() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        // Independent triple loop over the literal.
        let p = EX1_P2;
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += p[i][k] * p[k][j];
                }
                assert!((m.transition(0)[(i, j)] - s).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn example4_zero_theta_is_absorbing() {
        let m = BuiltinExample::Four { theta1: 0.0, theta2: 0.0 }.model::<f64>().unwrap();
        for i in 0..3 {
            assert_eq!(m.transition(1).row(i), &[1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn example4_rejects_inadmissible_theta() {
        let err = BuiltinExample::Four { theta1: 0.3, theta2: 0.2 }.model::<f64>().unwrap_err();
        assert!(matches!(err, ModelError::Theta(_)));
        assert!(BuiltinExample::Four { theta1: 0.1, theta2: 0.8 }.model::<f64>().is_err());
    }

    #[test]
    fn all_builtins_validate() {
        for ex in [
            BuiltinExample::One,
            BuiltinExample::TwoDiscrete,
            BuiltinExample::TwoGaussian,
            BuiltinExample::Three,
            BuiltinExample::Four { theta1: 0.2, theta2: 0.3 },
        ] {
            let m = ex.model::<f64>().unwrap();
            assert!(m.validate(1e-6).is_empty(), "{}", ex.label());
        }
    }

    #[test]
    fn exact_rows_sum_to_one() {
        let m = BuiltinExample::Three.model::<BigRational>().unwrap();
        for p in m.transitions() {
            for i in 0..8 {
                assert_eq!(crate::scalar::sum(p.row(i)), BigRational::from_integer(1.into()));
            }
        }
    }

    #[test]
    fn tridiagonal_rows_stochastic() {
        let u = tridiagonal_kernel::<f64>(8, 0.7);
        for i in 0..8 {
            assert!((u.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert_eq!(u[(7, 6)], 1.0 - 0.7);
        assert_eq!(u[(6, 7)], 0.15000000000000002);
    }
}

const EX2_B: [[f64; 10]; 10] = [
    [0.0297, 0.1334, 0.1731, 0.0482, 0.1329, 0.1095, 0.0926, 0.0348, 0.1067, 0.1391],
    [0.0030, 0.0271, 0.0558, 0.0228, 0.0845, 0.0923, 0.1029, 0.0511, 0.2001, 0.3604],
    [0.0003, 0.0054, 0.0169, 0.0094, 0.0444, 0.0599, 0.0812, 0.0487, 0.2263, 0.5075],
    [0.0000, 0.0011, 0.0051, 0.0038, 0.0225, 0.0368, 0.0593, 0.0418, 0.2250, 0.6046],
    [0.0000, 0.0002, 0.0015, 0.0015, 0.0113, 0.0223, 0.0423, 0.0345, 0.2133, 0.6731],
    [0.0000, 0.0000, 0.0005, 0.0006, 0.0056, 0.0134, 0.0298, 0.0281, 0.1977, 0.7243],
    [0.0000, 0.0000, 0.0001, 0.0002, 0.0028, 0.0081, 0.0210, 0.0227, 0.1813, 0.7638],
    [0.0000, 0.0000, 0.0000, 0.0001, 0.0014, 0.0048, 0.0147, 0.0183, 0.1651, 0.7956],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0007, 0.0029, 0.0103, 0.0147, 0.1497, 0.8217],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0004, 0.0017, 0.0072, 0.0118, 0.1355, 0.8434],
];

const EX2_P1: [[f64; 10]; 10] = [
    [0.9496, 0.0056, 0.0056, 0.0056, 0.0056, 0.0056, 0.0056, 0.0056, 0.0056, 0.0056],
    [0.9023, 0.0081, 0.0112, 0.0112, 0.0112, 0.0112, 0.0112, 0.0112, 0.0112, 0.0112],
    [0.8574, 0.0097, 0.0166, 0.0166, 0.0166, 0.0166, 0.0166, 0.0166, 0.0166, 0.0167],
    [0.8145, 0.0109, 0.0218, 0.0218, 0.0218, 0.0218, 0.0218, 0.0218, 0.0218, 0.0220],
    [0.7737, 0.0119, 0.0268, 0.0268, 0.0268, 0.0268, 0.0268, 0.0268, 0.0268, 0.0268],
    [0.7351, 0.0126, 0.0315, 0.0315, 0.0315, 0.0315, 0.0315, 0.0315, 0.0315, 0.0318],
    [0.6981, 0.0131, 0.0361, 0.0361, 0.0361, 0.0361, 0.0361, 0.0361, 0.0361, 0.0361],
    [0.6632, 0.0136, 0.0404, 0.0404, 0.0404, 0.0404, 0.0404, 0.0404, 0.0404, 0.0404],
    [0.6301, 0.0139, 0.0445, 0.0445, 0.0445, 0.0445, 0.0445, 0.0445, 0.0445, 0.0445],
    [0.5987, 0.0141, 0.0484, 0.0484, 0.0484, 0.0484, 0.0484, 0.0484, 0.0484, 0.0484],
];

const EX2_P2: [[f64; 10]; 10] = [
    [0.5688, 0.0143, 0.0521, 0.0521, 0.0521, 0.0521, 0.0521, 0.0521, 0.0521, 0.0522],
    [0.5400, 0.0144, 0.0557, 0.0557, 0.0557, 0.0557, 0.0557, 0.0557, 0.0557, 0.0557],
    [0.5133, 0.0145, 0.0590, 0.0590, 0.0590, 0.0590, 0.0590, 0.0590, 0.0590, 0.0592],
    [0.4877, 0.0145, 0.0622, 0.0622, 0.0622, 0.0622, 0.0622, 0.0622, 0.0622, 0.0624],
    [0.4631, 0.0145, 0.0653, 0.0653, 0.0653, 0.0653, 0.0653, 0.0653, 0.0653, 0.0653],
    [0.4400, 0.0144, 0.0682, 0.0682, 0.0682, 0.0682, 0.0682, 0.0682, 0.0682, 0.0682],
    [0.4181, 0.0144, 0.0709, 0.0709, 0.0709, 0.0709, 0.0709, 0.0709, 0.0709, 0.0712],
    [0.3969, 0.0143, 0.0736, 0.0736, 0.0736, 0.0736, 0.0736, 0.0736, 0.0736, 0.0736],
    [0.3771, 0.0141, 0.0761, 0.0761, 0.0761, 0.0761, 0.0761, 0.0761, 0.0761, 0.0761],
    [0.3585, 0.0140, 0.0784, 0.0784, 0.0784, 0.0784, 0.0784, 0.0784, 0.0784, 0.0787],
];

const EX2_COSTS_BY_ACTION: [[f64; 10]; 2] = [
    [0.5986, 0.5810, 0.6116, 0.6762, 0.5664, 0.6188, 0.7107, 0.4520, 0.5986, 0.7714],
    [0.6986, 0.6727, 0.7017, 0.7649, 0.6536, 0.6005, 0.6924, 0.4324, 0.5790, 0.6714],
];

const EX3_P1: [[f64; 8]; 8] = [
    [0.1851, 0.1692, 0.1630, 0.1546, 0.1324, 0.0889, 0.0546, 0.0522],
    [0.1538, 0.1531, 0.1601, 0.1580, 0.1395, 0.0994, 0.0667, 0.0694],
    [0.1307, 0.1378, 0.1489, 0.1595, 0.1472, 0.1143, 0.0769, 0.0847],
    [0.1157, 0.1307, 0.1437, 0.1591, 0.1496, 0.1199, 0.0840, 0.0973],
    [0.1053, 0.1196, 0.1388, 0.1579, 0.1520, 0.1248, 0.0888, 0.1128],
    [0.0850, 0.1056, 0.1326, 0.1618, 0.1585, 0.1348, 0.0977, 0.1240],
    [0.0707, 0.0906, 0.1217, 0.1578, 0.1629, 0.1447, 0.1078, 0.1438],
    [0.0549, 0.0757, 0.1095, 0.1502, 0.1666, 0.1576, 0.1189, 0.1666],
];

const EX3_P2: [[f64; 8]; 8] = [
    [0.0488, 0.0696, 0.1016, 0.1413, 0.1599, 0.1614, 0.1270, 0.1904],
    [0.0413, 0.0604, 0.0882, 0.1292, 0.1503, 0.1661, 0.1425, 0.2220],
    [0.0329, 0.0482, 0.0752, 0.1195, 0.1525, 0.1694, 0.1519, 0.2504],
    [0.0248, 0.0388, 0.0649, 0.1097, 0.1503, 0.1732, 0.1643, 0.2740],
    [0.0196, 0.0309, 0.0566, 0.0985, 0.1429, 0.1805, 0.1745, 0.2965],
    [0.0158, 0.0258, 0.0517, 0.0934, 0.1392, 0.1785, 0.1794, 0.3162],
    [0.0134, 0.0221, 0.0463, 0.0844, 0.1335, 0.1714, 0.1822, 0.3467],
    [0.0110, 0.0186, 0.0406, 0.0783, 0.1246, 0.1679, 0.1899, 0.3691],
];

const EX3_P3: [[f64; 8]; 8] = [
    [0.0077, 0.0140, 0.0337, 0.0704, 0.1178, 0.1632, 0.1983, 0.3949],
    [0.0058, 0.0117, 0.0297, 0.0659, 0.1122, 0.1568, 0.1954, 0.4225],
    [0.0041, 0.0090, 0.0244, 0.0581, 0.1011, 0.1494, 0.2013, 0.4526],
    [0.0032, 0.0076, 0.0210, 0.0515, 0.0941, 0.1400, 0.2023, 0.4803],
    [0.0022, 0.0055, 0.0165, 0.0439, 0.0865, 0.1328, 0.2006, 0.5120],
    [0.0017, 0.0044, 0.0132, 0.0362, 0.0751, 0.1264, 0.2046, 0.5384],
    [0.0012, 0.0033, 0.0106, 0.0317, 0.0702, 0.1211, 0.1977, 0.5642],
    [0.0009, 0.0025, 0.0091, 0.0273, 0.0638, 0.1134, 0.2004, 0.5826],
];

const EX3_P4: [[f64; 8]; 8] = [
    [0.0007, 0.0020, 0.0075, 0.0244, 0.0609, 0.1104, 0.2013, 0.5928],
    [0.0005, 0.0016, 0.0063, 0.0208, 0.0527, 0.1001, 0.1991, 0.6189],
    [0.0004, 0.0013, 0.0049, 0.0177, 0.0468, 0.0923, 0.1981, 0.6385],
    [0.0003, 0.0009, 0.0038, 0.0149, 0.0407, 0.0854, 0.2010, 0.6530],
    [0.0002, 0.0007, 0.0031, 0.0123, 0.0346, 0.0781, 0.2022, 0.6688],
    [0.0001, 0.0005, 0.0023, 0.0100, 0.0303, 0.0713, 0.1980, 0.6875],
    [0.0001, 0.0004, 0.0019, 0.0083, 0.0266, 0.0683, 0.1935, 0.7009],
    [0.0001, 0.0003, 0.0014, 0.0069, 0.0240, 0.0651, 0.1878, 0.7144],
];

const EX3_P5: [[f64; 8]; 8] = [
    [0.0000, 0.0002, 0.0010, 0.0054, 0.0204, 0.0590, 0.1772, 0.7368],
    [0.0000, 0.0001, 0.0008, 0.0041, 0.0168, 0.0515, 0.1663, 0.7604],
    [0.0000, 0.0001, 0.0006, 0.0038, 0.0156, 0.0480, 0.1596, 0.7723],
    [0.0000, 0.0001, 0.0005, 0.0032, 0.0139, 0.0450, 0.1603, 0.7770],
    [0.0000, 0.0001, 0.0004, 0.0028, 0.0124, 0.0418, 0.1590, 0.7835],
    [0.0000, 0.0001, 0.0003, 0.0023, 0.0106, 0.0389, 0.1547, 0.7931],
    [0.0000, 0.0000, 0.0003, 0.0018, 0.0090, 0.0351, 0.1450, 0.8088],
    [0.0000, 0.0000, 0.0002, 0.0015, 0.0080, 0.0325, 0.1386, 0.8192],
];

const EX3_P6: [[f64; 8]; 8] = [
    [0.0000, 0.0000, 0.0001, 0.0012, 0.0067, 0.0296, 0.1331, 0.8293],
    [0.0000, 0.0000, 0.0001, 0.0010, 0.0059, 0.0275, 0.1238, 0.8417],
    [0.0000, 0.0000, 0.0001, 0.0009, 0.0056, 0.0272, 0.1238, 0.8424],
    [0.0000, 0.0000, 0.0001, 0.0009, 0.0053, 0.0269, 0.1234, 0.8434],
    [0.0000, 0.0000, 0.0001, 0.0006, 0.0043, 0.0237, 0.1189, 0.8524],
    [0.0000, 0.0000, 0.0001, 0.0005, 0.0038, 0.0215, 0.1129, 0.8612],
    [0.0000, 0.0000, 0.0000, 0.0004, 0.0032, 0.0191, 0.1094, 0.8679],
    [0.0000, 0.0000, 0.0000, 0.0003, 0.0025, 0.0161, 0.1011, 0.8800],
];

const EX3_P7: [[f64; 8]; 8] = [
    [0.0000, 0.0000, 0.0000, 0.0003, 0.0022, 0.0143, 0.0938, 0.8894],
    [0.0000, 0.0000, 0.0000, 0.0002, 0.0019, 0.0136, 0.0901, 0.8942],
    [0.0000, 0.0000, 0.0000, 0.0002, 0.0017, 0.0126, 0.0849, 0.9006],
    [0.0000, 0.0000, 0.0000, 0.0002, 0.0015, 0.0118, 0.0819, 0.9046],
    [0.0000, 0.0000, 0.0000, 0.0001, 0.0013, 0.0108, 0.0754, 0.9124],
    [0.0000, 0.0000, 0.0000, 0.0001, 0.0011, 0.0098, 0.0714, 0.9176],
    [0.0000, 0.0000, 0.0000, 0.0001, 0.0010, 0.0090, 0.0713, 0.9186],
    [0.0000, 0.0000, 0.0000, 0.0001, 0.0009, 0.0084, 0.0675, 0.9231],
];

const EX3_P8: [[f64; 8]; 8] = [
    [0.0000, 0.0000, 0.0000, 0.0001, 0.0008, 0.0078, 0.0665, 0.9248],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0007, 0.0068, 0.0626, 0.9299],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0006, 0.0061, 0.0581, 0.9352],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0005, 0.0057, 0.0561, 0.9377],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0005, 0.0053, 0.0558, 0.9384],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0004, 0.0051, 0.0558, 0.9387],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0004, 0.0045, 0.0522, 0.9429],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0003, 0.0040, 0.0505, 0.9452],
];

const EX3_COSTS: [[f64; 8]; 8] = [
    [1.0000, 2.2486, 4.1862, 6.9509, 11.2709, 15.9589, 21.4617, 27.6965],
    [31.3230, 8.8185, 9.6669, 11.4094, 14.2352, 17.8532, 22.3155, 27.5353],
    [50.0039, 26.3162, 14.6326, 15.3534, 17.1427, 19.7455, 23.1064, 27.3025],
    [65.0359, 40.2025, 27.5380, 19.5840, 20.3017, 21.8682, 24.2022, 27.4108],
    [79.1544, 53.1922, 39.5408, 30.5670, 23.3697, 23.9185, 25.1941, 27.4021],
    [90.7494, 63.6983, 48.6593, 38.6848, 30.4868, 25.7601, 26.0012, 27.1867],
    [99.1985, 71.1173, 55.0183, 44.0069, 34.7860, 29.0205, 26.9721, 27.1546],
    [106.3851, 77.2019, 60.0885, 47.8917, 37.6330, 30.8279, 27.7274, 26.4338],
];
