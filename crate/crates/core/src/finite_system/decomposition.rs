use super::{GridKind, TrajectoryBundle};
use crate::error::{invalid, Result};

/// `X^i_t = X^i_0 + B_t + I_t + J_t - E_t` on the bundle grid: drift part,
/// own main jumps, total collateral sum, and the collateral the particle
/// would have sent to itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub particle: usize,
    pub drift: Vec<f64>,
    pub main_jumps: Vec<f64>,
    pub collateral: Vec<f64>,
    pub self_collateral: Vec<f64>,
}

impl Decomposition {
    /// `max_k |X_k - X_0 - B_k - I_k - J_k + E_k|` against the bundle paths.
    pub fn reconstruction_error(&self, bundle: &TrajectoryBundle) -> f64 {
        let path = bundle.path(self.particle);
        let x0 = path[0];
        path.iter()
            .enumerate()
            .map(|(k, &x)| {
                (x - x0 - self.drift[k] - self.main_jumps[k] - self.collateral[k]
                    + self.self_collateral[k])
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn decompose_trajectory(bundle: &TrajectoryBundle, i: usize) -> Result<Decomposition> {
    if i >= bundle.n {
        return Err(invalid(format!(
            "particle {i} out of range for N = {}",
            bundle.n
        )));
    }
    let len = bundle.len();
    let mut out = Decomposition {
        particle: i,
        drift: Vec::with_capacity(len),
        main_jumps: Vec::with_capacity(len),
        collateral: Vec::with_capacity(len),
        self_collateral: Vec::with_capacity(len),
    };
    let (mut b, mut m, mut j, mut e) = (0.0, 0.0, 0.0, 0.0);
    let scale = bundle.collateral_scale;
    for k in 0..len {
        if k > 0 {
            b += bundle.left_limit(k)[i] - bundle.state(k - 1)[i];
        }
        if let GridKind::Accepted(idx) = bundle.kinds()[k] {
            let ev = &bundle.events()[idx];
            let d = ev.u.expect("accepted event carries u") * scale;
            j += d;
            if ev.particle == i {
                e += d;
                m += ev.main_jump;
            }
        }
        out.drift.push(b);
        out.main_jumps.push(m);
        out.collateral.push(j);
        out.self_collateral.push(e);
    }
    Ok(out)
}
