//! Three-term chains `q_k = alpha(q_{k+1}) - beta(q_{k+2})`, `k = 0..m-2`.
//!
//! The chain is read as a map from `(q_0, q_1)` to `(q_{m-1}, q_m)`. Its
//! sensitivity to `q_1` is governed by the tridiagonal determinants
//! `A_{k,l}` and `bar A_{k,l}`, and with the canonical pair
//! `(q, p) = (q_m, q_{m-1} - q_{m+1})` the response obeys Hamilton's
//! equations with `q_1` as time. The boundary value `q_{m+1} = a` is a
//! parameter, not a dynamical variable.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{det_lu, SquareMatrix};
use crate::map::{MapDescriptor, Params};
use crate::sampling::rng;

pub type ScalarFn = dyn Fn(&Jet) -> Result<Jet> + Send + Sync;

/// Chain length `m` with `alpha`, `beta` and `beta^{-1}` evaluable on jets.
#[derive(Clone)]
pub struct ChainSpec {
    m: usize,
    alpha: Arc<ScalarFn>,
    beta: Arc<ScalarFn>,
    beta_inv: Arc<ScalarFn>,
    unit_beta: bool,
    c: Option<f64>,
}

impl fmt::Debug for ChainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChainSpec")
            .field("m", &self.m)
            .field("unit_beta", &self.unit_beta)
            .field("c", &self.c)
            .finish()
    }
}

impl ChainSpec {
    pub fn new<A, B, BI>(m: usize, alpha: A, beta: B, beta_inv: BI) -> Result<Self>
    where
        A: Fn(&Jet) -> Result<Jet> + Send + Sync + 'static,
        B: Fn(&Jet) -> Result<Jet> + Send + Sync + 'static,
        BI: Fn(&Jet) -> Result<Jet> + Send + Sync + 'static,
    {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("chain length m must be >= 2, got {m}")));
        }
        Ok(ChainSpec {
            m,
            alpha: Arc::new(alpha),
            beta: Arc::new(beta),
            beta_inv: Arc::new(beta_inv),
            unit_beta: false,
            c: None,
        })
    }

    /// Chain with `beta = identity`; its Hamiltonian is `H = q_0`.
    pub fn with_identity_beta<A>(m: usize, alpha: A) -> Result<Self>
    where
        A: Fn(&Jet) -> Result<Jet> + Send + Sync + 'static,
    {
        let mut s = ChainSpec::new(m, alpha, |q| Ok(q.clone()), |q| Ok(q.clone()))?;
        s.unit_beta = true;
        Ok(s)
    }

    /// `alpha(q) = q^2 + 2q + c`, `beta(q) = q`.
    pub fn henon(m: usize, c: f64) -> Result<Self> {
        let mut s = ChainSpec::with_identity_beta(m, move |q| Ok(&(&q.square() + &q.scale(2.0)) + c))?;
        s.c = Some(c);
        Ok(s)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn has_unit_beta(&self) -> bool {
        self.unit_beta
    }

    /// The constant of a Hénon chain, if this is one.
    pub fn henon_constant(&self) -> Option<f64> {
        self.c
    }

    pub fn alpha(&self, q: &Jet) -> Result<Jet> {
        (self.alpha)(q)
    }

    pub fn beta(&self, q: &Jet) -> Result<Jet> {
        (self.beta)(q)
    }

    pub fn beta_inv(&self, q: &Jet) -> Result<Jet> {
        (self.beta_inv)(q)
    }

    fn derivative(f: &ScalarFn, q: f64) -> Result<f64> {
        Ok(f(&Jet::variable(q, 0, 1))?.partial(0))
    }

    /// Checks `beta^{-1}(beta(q)) = q` at every sample.
    pub fn check_beta_inverse(&self, samples: &[f64]) -> Result<()> {
        for &q in samples {
            let back = self.beta_inv(&self.beta(&Jet::constant(q))?)?.value();
            if (back - q).abs() > 1e-10 * (1.0 + q.abs()) {
                return Err(Error::InvalidParameter(format!("beta inverse fails at q = {q} (got {back})")));
            }
        }
        Ok(())
    }

    fn backward(&self, top: Jet, next: Jet) -> Result<Vec<Jet>> {
        let m = self.m;
        let mut q = vec![Jet::constant(0.0); m + 1];
        q[m] = top;
        q[m - 1] = next;
        for k in (0..m - 1).rev() {
            let v = &self.alpha(&q[k + 1])? - &self.beta(&q[k + 2])?;
            if !v.is_finite() {
                return Err(chain_step_error(k, Error::NonFinite(format!("q_{k}"))));
            }
            q[k] = v;
        }
        Ok(q)
    }

    fn forward(&self, q0: Jet, q1: Jet) -> Result<Vec<Jet>> {
        let m = self.m;
        let mut q = Vec::with_capacity(m + 1);
        q.push(q0);
        q.push(q1);
        for k in 2..=m {
            let v = self
                .beta_inv(&(&self.alpha(&q[k - 1])? - &q[k - 2]))
                .map_err(|e| chain_step_error(k, e))?;
            if !v.is_finite() {
                return Err(chain_step_error(k, Error::NonFinite(format!("q_{k}"))));
            }
            q.push(v);
        }
        Ok(q)
    }
}

fn chain_step_error(k: usize, e: Error) -> Error {
    Error::IterateDomain {
        step: k,
        source: Box::new(e),
    }
}

/// Chain values `q_0..q_m` and the boundary parameter `a = q_{m+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub q: Vec<f64>,
    pub a: f64,
}

/// Derivative coefficients along a chain, indexed `0..=m+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCoefficients {
    /// `a_k = alpha'(q_k)`, `k <= m`.
    pub a: Vec<f64>,
    /// `b_k = beta'(q_{k+1})`, `b_0 = 0`.
    pub b: Vec<f64>,
    /// `c_k = (beta^{-1})'(beta(q_{k+1}))`, `c_{m+1} = 0`.
    pub c: Vec<f64>,
    /// `bar a_k = a_k c_k`.
    pub abar: Vec<f64>,
}

impl ChainState {
    pub fn m(&self) -> usize {
        self.q.len() - 1
    }

    /// `q_{m+1}`, i.e. the parameter `a`.
    fn q_ext(&self, k: usize) -> f64 {
        if k <= self.m() {
            self.q[k]
        } else {
            self.a
        }
    }

    /// Largest residual of `q_k - alpha(q_{k+1}) + beta(q_{k+2})`, `k <= m-2`.
    pub fn residual(&self, spec: &ChainSpec) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..self.m() - 1 {
            let r = self.q[k] - spec.alpha(&Jet::constant(self.q[k + 1]))?.value()
                + spec.beta(&Jet::constant(self.q[k + 2]))?.value();
            worst = worst.max(r.abs());
        }
        Ok(worst)
    }

    pub fn coefficients(&self, spec: &ChainSpec) -> Result<ChainCoefficients> {
        let m = self.m();
        let mut a = Vec::with_capacity(m + 2);
        let mut b = Vec::with_capacity(m + 2);
        let mut c = Vec::with_capacity(m + 2);
        for k in 0..=m + 1 {
            a.push(if k <= m { ChainSpec::derivative(&*spec.alpha, self.q[k])? } else { 0.0 });
            let qn = self.q_ext(k + 1);
            b.push(if k == 0 || k > m { 0.0 } else { ChainSpec::derivative(&*spec.beta, qn)? });
            c.push(if k > m {
                0.0
            } else {
                let bq = spec.beta(&Jet::constant(qn))?.value();
                ChainSpec::derivative(&*spec.beta_inv, bq)?
            });
        }
        let abar = a.iter().zip(&c).map(|(x, y)| x * y).collect();
        Ok(ChainCoefficients { a, b, c, abar })
    }

    /// `(q, p) = (q_m, q_{m-1} - q_{m+1})`.
    pub fn canonical_pair(&self) -> (f64, f64) {
        canonical_pair(self)
    }
}

pub fn canonical_pair(state: &ChainState) -> (f64, f64) {
    let m = state.m();
    (state.q[m], state.q[m - 1] - state.a)
}

/// Fills `q_{m-2}, ..., q_0` backward from `q_m` and `q_{m-1}`.
pub fn chain_propagate(spec: &ChainSpec, q_m: f64, q_m1: f64, a: f64) -> Result<ChainState> {
    let q = spec.backward(Jet::constant(q_m), Jet::constant(q_m1))?;
    Ok(ChainState {
        q: q.iter().map(Jet::value).collect(),
        a,
    })
}

/// Fills `q_2, ..., q_m` forward from `q_0` and `q_1`.
pub fn chain_propagate_forward(spec: &ChainSpec, q0: f64, q1: f64, a: f64) -> Result<ChainState> {
    let q = spec.forward(Jet::constant(q0), Jet::constant(q1))?;
    Ok(ChainState {
        q: q.iter().map(Jet::value).collect(),
        a,
    })
}

/// The chain as a map `(q_0, q_1) -> (q_{m-1}, q_m)`.
pub fn chain_map(spec: &ChainSpec, id: &str, params: Params) -> MapDescriptor {
    let fwd = spec.clone();
    let inv = spec.clone();
    let m = spec.m;
    MapDescriptor::new(
        id,
        2,
        params,
        move |v| {
            let q = fwd.forward(v[0].clone(), v[1].clone())?;
            Ok(vec![q[m - 1].clone(), q[m].clone()])
        },
        move |v| {
            let q = inv.backward(v[1].clone(), v[0].clone())?;
            Ok(vec![q[0].clone(), q[1].clone()])
        },
    )
}

/// The Hénon chain `alpha(q) = q^2 + 2q + c`, `beta = identity`, as a 2D map.
pub fn chain1d_henon_map(m: usize, c: f64) -> Result<MapDescriptor> {
    let spec = ChainSpec::henon(m, c)?;
    let mut params = Params::new();
    params.insert("m".into(), m as f64);
    params.insert("c".into(), c);
    Ok(chain_map(&spec, "chain1d-henon", params))
}

/// `A_{k,l}` from `a_k..a_l` and `b_k..b_{l-1}`; an empty range gives 1.
pub fn chain_det_a(a: &[f64], b: &[f64]) -> Result<f64> {
    tridiagonal(a, b, "b")
}

/// `bar A_{k,l}` from `bar a_k..bar a_l` and `c_{k+1}..c_l`.
pub fn chain_det_bar_a(abar: &[f64], c: &[f64]) -> Result<f64> {
    tridiagonal(abar, c, "c")
}

/// Continuant `D_l = d_l D_{l-1} - off_{l-1} D_{l-2}`, `D_{-1} = 1`.
fn tridiagonal(diag: &[f64], off: &[f64], name: &str) -> Result<f64> {
    if off.len() + 1 != diag.len().max(1) || (diag.is_empty() && !off.is_empty()) {
        return Err(Error::Index(format!(
            "{} diagonal entries need {} `{name}` coefficients, got {}",
            diag.len(),
            diag.len().saturating_sub(1),
            off.len()
        )));
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for (i, d) in diag.iter().enumerate() {
        let o = if i == 0 { 0.0 } else { off[i - 1] };
        let next = d * cur - o * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Dense `A_{k,l}` matrix (diagonal `a`, superdiagonal `b`, subdiagonal 1).
pub fn chain_matrix_a(a: &[f64], b: &[f64]) -> Result<SquareMatrix> {
    let n = a.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        rows[i][i] = a[i];
        if i + 1 < n {
            rows[i][i + 1] = *b.get(i).ok_or_else(|| Error::Index("too few b coefficients".into()))?;
            rows[i + 1][i] = 1.0;
        }
    }
    SquareMatrix::from_rows(&rows)
}

/// Dense `bar A_{k,l}` matrix (diagonal `bar a`, superdiagonal 1, subdiagonal `c`).
pub fn chain_matrix_bar_a(abar: &[f64], c: &[f64]) -> Result<SquareMatrix> {
    let n = abar.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        rows[i][i] = abar[i];
        if i + 1 < n {
            rows[i][i + 1] = 1.0;
            rows[i + 1][i] = *c.get(i).ok_or_else(|| Error::Index("too few c coefficients".into()))?;
        }
    }
    SquareMatrix::from_rows(&rows)
}

/// `A_{k,l}` for a chain state, `1 <= k`, `l <= m`, `l >= k - 1`.
pub fn state_det_a(co: &ChainCoefficients, k: usize, l: usize) -> Result<f64> {
    check_range(co, k, l)?;
    if l + 1 == k {
        return Ok(1.0);
    }
    chain_det_a(&co.a[k..=l], &co.b[k..l])
}

/// `bar A_{k,l}` for a chain state.
pub fn state_det_bar_a(co: &ChainCoefficients, k: usize, l: usize) -> Result<f64> {
    check_range(co, k, l)?;
    if l + 1 == k {
        return Ok(1.0);
    }
    chain_det_bar_a(&co.abar[k..=l], &co.c[k + 1..=l])
}

fn check_range(co: &ChainCoefficients, k: usize, l: usize) -> Result<()> {
    if l + 1 < k || l >= co.a.len() {
        return Err(Error::Index(format!("chain determinant range k = {k}, l = {l}")));
    }
    Ok(())
}

/// `H(q, p) = q_0` with its gradient `(dH/dq, dH/dp)`, for chains with `beta = identity`.
pub fn chain_hamiltonian_jet(spec: &ChainSpec, q: f64, p: f64, a: f64) -> Result<Jet> {
    if !spec.unit_beta {
        return Err(Error::InvalidParameter(
            "closed-form chain Hamiltonian needs beta = identity".into(),
        ));
    }
    let qq = Jet::variable(q, 0, 2);
    let pp = Jet::variable(p, 1, 2);
    let chain = spec.backward(qq, &pp + a)?;
    Ok(chain[0].clone())
}

/// `H = q_0` evaluated from the canonical pair of `state`.
pub fn chain_hamiltonian(spec: &ChainSpec, state: &ChainState) -> Result<f64> {
    let (q, p) = canonical_pair(state);
    Ok(chain_hamiltonian_jet(spec, q, p, state.a)?.value())
}

/// Closed forms of the Hénon-chain Hamiltonian for `c = 0`:
/// `m = 2` gives `(p+a+1)^2 - q - 1`, `m = 3` gives `((p+a+1)^2 - q)^2 - (p+a+1)`.
pub fn henon_chain_closed_form(m: usize, q: f64, p: f64, a: f64) -> Result<f64> {
    let s = p + a + 1.0;
    match m {
        2 => Ok(s * s - q - 1.0),
        3 => Ok((s * s - q).powi(2) - s),
        _ => Err(Error::UnsupportedOrder(m)),
    }
}

/// Image point of the Hénon map (with `b = 1`, constant `c + 1`) for the
/// canonical pair: `(X, Y) = (p + a + 1, q + 1)`.
pub fn henon_correspondence(q: f64, p: f64, a: f64) -> (f64, f64) {
    (p + a + 1.0, q + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainHamiltonReport {
    pub m: usize,
    pub q1: f64,
    pub step: f64,
    /// `dq/dq_1` by central differences with `q_0` held fixed.
    pub dq_dq1: f64,
    pub dp_dq1: f64,
    /// `bar A_{1,m-1}`.
    pub bar_a: f64,
    pub dh_dp: Option<f64>,
    pub dh_dq: Option<f64>,
    pub bar_a_residual: f64,
    pub hamilton_q_residual: Option<f64>,
    pub hamilton_p_residual: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// Checks `dq/dq_1 = dH/dp`, `dp/dq_1 = -dH/dq` and `dq/dq_1 = bar A_{1,m-1}`.
///
/// The Hamilton equations are checked only for chains with `beta = identity`.
pub fn verify_chain_hamilton(spec: &ChainSpec, state: &ChainState) -> Result<ChainHamiltonReport> {
    let m = spec.m;
    if state.m() != m {
        return Err(Error::Dimension {
            expected: m + 1,
            got: state.q.len(),
        });
    }
    let tol = 1e-6;
    let co = state.coefficients(spec)?;
    if co.b[1..=m].iter().any(|b| b.abs() < 1e-12) {
        return Err(Error::singular("beta'", 0.0));
    }
    let (q0, q1) = (state.q[0], state.q[1]);
    let h = 1e-6 * (1.0 + q1.abs());
    let plus = chain_propagate_forward(spec, q0, q1 + h, state.a)?;
    let minus = chain_propagate_forward(spec, q0, q1 - h, state.a)?;
    let (qp, pp) = canonical_pair(&plus);
    let (qm, pm) = canonical_pair(&minus);
    let dq_dq1 = (qp - qm) / (2.0 * h);
    let dp_dq1 = (pp - pm) / (2.0 * h);
    let bar_a = state_det_bar_a(&co, 1, m - 1)?;
    let bar_a_residual = rel(dq_dq1, bar_a);

    let (dh_dq, dh_dp, hq, hp) = if spec.unit_beta {
        let (q, p) = canonical_pair(state);
        let hj = chain_hamiltonian_jet(spec, q, p, state.a)?;
        let (dq, dp) = (hj.partial(0), hj.partial(1));
        (Some(dq), Some(dp), Some(rel(dq_dq1, dp)), Some(rel(dp_dq1, -dq)))
    } else {
        (None, None, None, None)
    };
    let pass = bar_a_residual <= tol && hq.is_none_or(|r| r <= tol) && hp.is_none_or(|r| r <= tol);
    Ok(ChainHamiltonReport {
        m,
        q1,
        step: h,
        dq_dq1,
        dp_dq1,
        bar_a,
        dh_dp,
        dh_dq,
        bar_a_residual,
        hamilton_q_residual: hq,
        hamilton_p_residual: hp,
        tol,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheckReport {
    pub m: usize,
    pub a: f64,
    pub c: f64,
    pub seed: u64,
    /// Worst relative gap between recurrence and dense determinants.
    pub det_recurrence_error: f64,
    /// Worst relative gap in `bar A = (prod c) A`.
    pub bar_a_identity_error: f64,
    /// Worst `|H(q, p) - q_0|` over random states.
    pub hamiltonian_error: f64,
    /// Worst closed-form error for `c = 0` (`None` if `c != 0` or `m > 3`).
    pub closed_form_error: Option<f64>,
    /// Worst `|H_henon(X, Y) - (H + 1)|` under `(X, Y) = (p+a+1, q+1)`.
    pub correspondence_error: Option<f64>,
    /// Same under the literal assignment `(X, Y) = (q+1, p+a+1)`.
    pub literal_correspondence_error: Option<f64>,
    pub hamilton: Vec<ChainHamiltonReport>,
    pub pass: bool,
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Random-coefficient determinant checks plus Hénon-chain checks for `m`, `a`, `c`.
pub fn chain_checks(m: usize, a: f64, c: f64, seed: u64) -> Result<ChainCheckReport> {
    let spec = ChainSpec::henon(m, c)?;
    let mut r = rng(seed);

    let mut det_err: f64 = 0.0;
    let mut bar_err: f64 = 0.0;
    for _ in 0..200 {
        let len = r.gen_range(1..=8);
        let av: Vec<f64> = (0..len).map(|_| r.gen_range(-2.0..2.0)).collect();
        let bv: Vec<f64> = (0..len).map(|_| r.gen_range(0.3..2.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let cv: Vec<f64> = bv.iter().map(|b| 1.0 / b).collect();
        let abar: Vec<f64> = av.iter().zip(&cv).map(|(x, y)| x * y).collect();
        let rec = chain_det_a(&av, &bv[..len - 1])?;
        det_err = det_err.max(rel_gap(rec, det_lu(&chain_matrix_a(&av, &bv[..len - 1])?)));
        // bar A uses c_{k+1}..c_l while A pairs b_k..b_{l-1}; with c_k b_k = 1.
        let recb = chain_det_bar_a(&abar, &cv[1..])?;
        det_err = det_err.max(rel_gap(recb, det_lu(&chain_matrix_bar_a(&abar, &cv[1..])?)));
        let prod: f64 = cv.iter().product();
        bar_err = bar_err.max(rel_gap(recb, prod * rec));
    }

    let mut h_err: f64 = 0.0;
    let mut closed: Option<f64> = (c == 0.0 && m <= 3).then_some(0.0);
    let mut corr: Option<f64> = (m <= 4).then_some(0.0);
    let mut literal: Option<f64> = (m <= 4).then_some(0.0);
    let henon_h = (m <= 4).then(|| crate::maps::henon_hamiltonian(m, 1.0, c + 1.0)).transpose()?;
    let mut hamilton = Vec::new();
    for i in 0..100 {
        let q = r.gen_range(-1.0..1.0);
        let p = r.gen_range(-1.0..1.0);
        let aa = if i == 0 { a } else { r.gen_range(-1.0..1.0) };
        let state = chain_propagate(&spec, q, p + aa, aa)?;
        let h = chain_hamiltonian(&spec, &state)?;
        h_err = h_err.max((h - state.q[0]).abs());
        if let Some(e) = closed.as_mut() {
            *e = e.max((henon_chain_closed_form(m, q, p, aa)? - state.q[0]).abs());
        }
        if let Some(hh) = &henon_h {
            let (x, y) = henon_correspondence(q, p, aa);
            if let Some(e) = corr.as_mut() {
                *e = e.max((hh.eval(&[x, y])? - (h + 1.0)).abs());
            }
            if let Some(e) = literal.as_mut() {
                *e = e.max((hh.eval(&[q + 1.0, p + aa + 1.0])? - (h + 1.0)).abs());
            }
        }
        if i < 10 {
            hamilton.push(verify_chain_hamilton(&spec, &state)?);
        }
    }
    let pass = det_err <= 1e-12
        && bar_err <= 1e-10
        && h_err <= 1e-10
        && closed.is_none_or(|e| e <= 1e-10)
        && corr.is_none_or(|e| e <= 1e-10)
        && hamilton.iter().all(|h| h.pass);
    Ok(ChainCheckReport {
        m,
        a,
        c,
        seed,
        det_recurrence_error: det_err,
        bar_a_identity_error: bar_err,
        hamiltonian_error: h_err,
        closed_form_error: closed,
        correspondence_error: corr,
        literal_correspondence_error: literal,
        hamilton,
        pass,
    })
}
