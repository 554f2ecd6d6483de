//! Hand-worked metric values.

pub struct HandCase {
    pub returns: &'static [f64],
    pub sharpe: f64,
    pub mdd: f64,
    pub calmar: Option<f64>,
}

// mean 0.0125, population std sqrt(2.1875e-4); path peaks at 0.03, dips to 0.02
pub const HAND_CASES: [HandCase; 3] = [
    HandCase {
        returns: &[0.01, 0.02, -0.01, 0.03],
        sharpe: 13.416407864998737,
        mdd: -0.01,
        calmar: Some(315.0),
    },
    HandCase {
        returns: &[0.1, -0.2, 0.1],
        sharpe: 0.0,
        mdd: -0.2,
        calmar: Some(0.0),
    },
    HandCase {
        returns: &[0.05, -0.02, -0.04, 0.03, -0.06, 0.01],
        sharpe: -2.0551067337612503,
        mdd: -0.09,
        calmar: Some(-14.0),
    },
];
