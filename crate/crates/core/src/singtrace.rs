//! Numerical Dixmier traces: partial sums of singular values, regularized
//! sequences, Cesaro means, zeta residues and graded diagonals.

use std::fmt;
use std::sync::Arc;

use faer::Side;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exec;
use crate::fit::least_squares;
use crate::fock::{OperatorMatrix, TruncatedBasis};
use crate::specfun::hurwitz_zeta;

type ValueFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
type MultFn = Arc<dyn Fn(usize) -> usize + Send + Sync>;

/// Singular values grouped by distinct value, listed in decreasing order.
#[derive(Clone)]
pub enum SingularSequence {
    ClosedForm { value: ValueFn, mult: MultFn, label: String },
    Explicit { values: Vec<f64>, mults: Vec<usize> },
}

impl fmt::Debug for SingularSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularSequence::ClosedForm { label, .. } => write!(f, "ClosedForm({label})"),
            SingularSequence::Explicit { values, .. } => write!(f, "Explicit(len {})", values.len()),
        }
    }
}

impl SingularSequence {
    pub fn closed_form<V, M>(label: &str, value: V, mult: M) -> Self
    where
        V: Fn(usize) -> f64 + Send + Sync + 'static,
        M: Fn(usize) -> usize + Send + Sync + 'static,
    {
        SingularSequence::ClosedForm {
            value: Arc::new(value),
            mult: Arc::new(mult),
            label: label.to_string(),
        }
    }

    /// Sorts the magnitudes in decreasing order; each entry has multiplicity one.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return domain("singular values must be finite");
        }
        let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        let mults = vec![1; v.len()];
        Ok(SingularSequence::Explicit { values: v, mults })
    }

    /// Singular values of a hermitian matrix (absolute eigenvalues).
    pub fn from_matrix(m: &OperatorMatrix) -> Result<Self> {
        let dense = m.to_dense();
        let defect = m.max_abs_diff(&m.adjoint());
        if defect > 1e-12 {
            return domain(format!("matrix is not hermitian (defect {defect:.3e})"));
        }
        let eig = dense
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let s = eig.S().column_vector();
        let vals: Vec<f64> = (0..m.dim()).map(|i| s[i].re).collect();
        Self::from_values(&vals)
    }

    /// Q_{B,xi}^{-s}: value (l + 2 + 2 xi)^-s with multiplicity l + 1.
    pub fn q_inverse_power(s: f64, xi: f64) -> Self {
        Self::closed_form(
            &format!("Q^-{s} (xi = {xi})"),
            move |l| (l as f64 + 2.0 + 2.0 * xi).powf(-s),
            |l| l + 1,
        )
    }

    /// Q_{B,xi}^{-1} Pi_j: simple values 1/(k + j + 2 + 2 xi).
    pub fn q_inverse_proj(xi: f64, j: usize) -> Self {
        Self::closed_form(
            &format!("Q^-1 Pi_{j} (xi = {xi})"),
            move |k| 1.0 / (k as f64 + j as f64 + 2.0 + 2.0 * xi),
            |_| 1,
        )
    }

    pub fn finite_rank(rank: usize) -> Self {
        Self::closed_form(&format!("rank {rank}"), move |k| if k < rank { 1.0 } else { 0.0 }, |_| 1)
    }

    /// mu_n = ratio^n.
    pub fn geometric(ratio: f64) -> Self {
        Self::closed_form(&format!("geometric {ratio}"), move |k| ratio.powi(k as i32), |_| 1)
    }

    /// mu_n = 1/(n + 1).
    pub fn harmonic() -> Self {
        Self::closed_form("harmonic", |k| 1.0 / (k as f64 + 1.0), |_| 1)
    }

    /// Distinct value and multiplicity of group `n`, if present.
    pub fn group(&self, n: usize) -> Option<(f64, usize)> {
        match self {
            SingularSequence::ClosedForm { value, mult, .. } => Some((value(n), mult(n))),
            SingularSequence::Explicit { values, mults } => values.get(n).map(|&v| (v, mults[n])),
        }
    }

    /// Number of singular values available, `None` when unbounded.
    pub fn len(&self) -> Option<usize> {
        match self {
            SingularSequence::ClosedForm { .. } => None,
            SingularSequence::Explicit { mults, .. } => Some(mults.iter().sum()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Singular values with multiplicities unrolled.
    pub fn unrolled(&self) -> impl Iterator<Item = f64> + '_ {
        (0..)
            .map_while(move |n| self.group(n))
            .flat_map(|(v, m)| std::iter::repeat_n(v, m))
    }

    /// Checks monotonicity, nonnegativity and multiplicities over the first `groups` groups.
    pub fn validate(&self, groups: usize) -> Result<()> {
        let mut prev = f64::INFINITY;
        for n in 0..groups {
            let Some((v, m)) = self.group(n) else { break };
            if m == 0 {
                return domain(format!("group {n} has multiplicity 0"));
            }
            if !(v >= 0.0) || v > prev {
                return domain(format!("group {n} breaks the non-increasing order ({v})"));
            }
            prev = v;
        }
        Ok(())
    }
}

/// Compensated running sum.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// sigma_N = sum of the first N singular values.
pub fn sigma_partial(seq: &SingularSequence, n: usize) -> Result<f64> {
    Ok(partial_sums_at(seq, &[n])?[0])
}

/// sigma_N for every N of an increasing schedule, in one pass over the groups.
pub fn partial_sums_at(seq: &SingularSequence, schedule: &[usize]) -> Result<Vec<f64>> {
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return domain("schedule must be strictly increasing");
    }
    if let (Some(len), Some(&last)) = (seq.len(), schedule.last()) {
        if last > len {
            return domain(format!("N = {last} exceeds the sequence length {len}"));
        }
    }
    let mut out = Vec::with_capacity(schedule.len());
    let mut acc = Kahan::default();
    let mut count = 0usize;
    let mut g = 0usize;
    // Values of group g not yet summed.
    let mut rest = 0usize;
    for &target in schedule {
        while count < target {
            if rest == 0 {
                rest = seq.group(g).expect("length checked").1;
            }
            let v = seq.group(g).expect("length checked").0;
            let take = rest.min(target - count);
            acc.add(v * take as f64);
            count += take;
            rest -= take;
            if rest == 0 {
                g += 1;
            }
        }
        out.push(acc.sum);
    }
    Ok(out)
}

/// gamma_N = sigma_N / log N.
pub fn gamma_sequence(seq: &SingularSequence, schedule: &[usize]) -> Result<Vec<(usize, f64)>> {
    if schedule.iter().any(|&n| n < 2) {
        return domain("gamma_N needs N >= 2");
    }
    let s = partial_sums_at(seq, schedule)?;
    Ok(schedule.iter().zip(s).map(|(&n, s)| (n, s / (n as f64).ln())).collect())
}

/// Cesaro mean (1/log lambda) int_{lambda0}^{lambda} sigma_s / log s ds/s, with
/// sigma_s the piecewise-linear interpolation of the partial sums.
pub fn cesaro_tau(seq: &SingularSequence, lambda: f64, lambda0: f64) -> Result<f64> {
    if !(lambda0 > std::f64::consts::E) || !(lambda > lambda0) {
        return domain(format!("need lambda > lambda0 > e, got {lambda}, {lambda0}"));
    }
    let top = lambda.ceil() as usize;
    if let Some(len) = seq.len() {
        if top > len {
            return domain(format!("lambda = {lambda} exceeds the sequence length {len}"));
        }
    }
    const GL_X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
    const GL_W: [f64; 4] = [0.347_854_845_137_453_8, 0.652_145_154_862_546_2, 0.652_145_154_862_546_2, 0.347_854_845_137_453_8];
    let mut integral = Kahan::default();
    let mut sigma = 0.0;
    for (n, mu) in seq.unrolled().take(top).enumerate() {
        // On [n, n + 1] sigma_s = sigma_n + (s - n) mu_n.
        let (a, b) = ((n as f64).max(lambda0), ((n + 1) as f64).min(lambda));
        if b > a {
            let h = 0.5 * (b - a);
            let mut part = 0.0;
            for (x, w) in GL_X.iter().zip(GL_W) {
                let s = a + h * (x + 1.0);
                part += w * (sigma + (s - n as f64) * mu) / (s * s.ln());
            }
            integral.add(part * h);
        }
        sigma += mu;
    }
    Ok(integral.sum / lambda.ln())
}

/// Interval that the Cesaro mean must fall in given the range of gamma over
/// [lambda0, lambda]: (1 - r) [min gamma, max gamma], r = log lambda0 / log lambda.
pub fn cesaro_bounds(min_gamma: f64, max_gamma: f64, lambda: f64, lambda0: f64) -> (f64, f64) {
    let f = 1.0 - lambda0.ln() / lambda.ln();
    (f * min_gamma, f * max_gamma)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    GammaFit,
    ZetaResidue,
    GradedDiagonal,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DixmierEstimate {
    pub value: f64,
    pub method: EstimateMethod,
    /// (N or s, estimate) pairs the value was extracted from.
    pub samples: Vec<(f64, f64)>,
    pub converged: bool,
    pub residual: f64,
}

/// Geometric schedule N = 2^10 .. 2^24.
pub fn default_schedule() -> Vec<usize> {
    (10..=24).map(|k| 1usize << k).collect()
}

/// Fits gamma_N = L + c/log N + (d N^-1/2 + e N^-1)/log N and returns L.
/// The residual also covers the change of L when the e term is dropped.
pub fn dixmier_via_gamma_fit(seq: &SingularSequence, tolerance: f64) -> Result<DixmierEstimate> {
    let mut schedule = default_schedule();
    if let Some(len) = seq.len() {
        schedule.retain(|&n| n <= len);
    }
    if schedule.len() < 8 {
        return domain("sequence too short for the gamma fit (need N up to 2^17)");
    }
    let gammas = gamma_sequence(seq, &schedule)?;
    let xs: Vec<f64> = gammas.iter().map(|g| g.0 as f64).collect();
    let ys: Vec<f64> = gammas.iter().map(|g| g.1).collect();
    let col = |n: f64, k: usize| {
        let l = n.ln();
        match k {
            0 => 1.0,
            1 => 1.0 / l,
            2 => n.powf(-0.5) / l,
            _ => 1.0 / (n * l),
        }
    };
    let f4 = least_squares(&xs, &ys, 4, col)?;
    let f3 = least_squares(&xs, &ys, 3, col)?;
    let residual = f4.max_residual.max((f4.coeffs[0] - f3.coeffs[0]).abs());
    Ok(DixmierEstimate {
        value: f4.coeffs[0],
        method: EstimateMethod::GammaFit,
        samples: xs.into_iter().zip(ys).collect(),
        converged: residual <= tolerance,
        residual,
    })
}

/// Tr Q_{B,xi}^{-s} = Z(s - 1, 1 + 2 xi) - (1 + 2 xi) Z(s, 1 + 2 xi), s > 2.
pub fn trace_q_power(s: f64, xi: f64) -> Result<f64> {
    if !(s > 2.0) {
        return domain(format!("Q^-s is trace class only for s > 2, got {s}"));
    }
    if !(xi >= 0.0) {
        return domain(format!("xi must be >= 0, got {xi}"));
    }
    let q = 1.0 + 2.0 * xi;
    Ok(hurwitz_zeta(s - 1.0, q)? - q * hurwitz_zeta(s, q)?)
}

/// Tr Q_{B,xi}^{-s} Pi_j = Z(s, j + 2(1 + xi)), s > 1.
pub fn trace_q_power_proj(s: f64, xi: f64, j: usize) -> Result<f64> {
    if !(s > 1.0) {
        return domain(format!("Q^-s Pi_j is trace class only for s > 1, got {s}"));
    }
    if !(xi >= 0.0) {
        return domain(format!("xi must be >= 0, got {xi}"));
    }
    hurwitz_zeta(s, j as f64 + 2.0 * (1.0 + xi))
}

/// lim_{s -> 1+} (s - 1) zeta(s) by Richardson extrapolation over s = 1 + 2^-k, k = 3..12.
/// A non-settling extrapolation table is reported through `converged`.
pub fn dixmier_via_zeta_residue<F>(zeta_fn: F, tolerance: f64) -> Result<DixmierEstimate>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut samples = Vec::new();
    for k in 3..=12 {
        let h = (0.5f64).powi(k);
        let z = zeta_fn(1.0 + h)?;
        if !z.is_finite() {
            return Err(Error::Numerical(format!("zeta function not finite at s = 1 + 2^-{k}")));
        }
        samples.push((1.0 + h, h * z));
    }
    // Rows of the table share a step halving; column m removes the h^m term.
    let mut table: Vec<Vec<f64>> = Vec::new();
    for (i, &(_, v)) in samples.iter().enumerate() {
        let mut row = vec![v];
        for m in 1..=i {
            let f = (1u64 << m) as f64;
            let r = (f * row[m - 1] - table[i - 1][m - 1]) / (f - 1.0);
            row.push(r);
        }
        table.push(row);
    }
    let last = table.last().expect("ten samples");
    let (mut best, mut residual) = (last[0], f64::INFINITY);
    for m in 1..last.len() {
        let d = (last[m] - last[m - 1]).abs();
        if d < residual {
            residual = d;
            best = last[m];
        }
    }
    Ok(DixmierEstimate {
        value: best,
        method: EstimateMethod::ZetaResidue,
        samples,
        converged: residual <= tolerance,
        residual,
    })
}

/// Shell sums of the spin-traced diagonal of Q_{B,xi}^{-1} M.
#[derive(Clone, Debug)]
pub struct GradedDiagonal {
    pub shell_sums: Vec<C64>,
}

impl GradedDiagonal {
    pub fn from_operator(m: &OperatorMatrix, xi: f64) -> Result<Self> {
        if !(xi >= 0.0) {
            return domain(format!("xi must be >= 0, got {xi}"));
        }
        let basis = m.basis();
        let sd = m.spin_dim();
        let diag = m.diag();
        let shell_sums = exec::map_indexed(basis.nmax() + 1, |l| {
            let q = l as f64 + 2.0 + 2.0 * xi;
            let r = basis.shell_range(l);
            let s: C64 = diag[r.start * sd..r.end * sd].iter().sum();
            s / q
        });
        Ok(GradedDiagonal { shell_sums })
    }

    pub fn basis(&self) -> TruncatedBasis {
        TruncatedBasis::new(self.shell_sums.len() - 1)
    }
}

/// Default number of excluded outer shells.
pub const DEFAULT_MARGIN: usize = 2;

/// Real part of the graded Dixmier estimate of Q_{B,xi}^{-1} M.
pub fn dixmier_graded(m: &OperatorMatrix, xi: f64, tolerance: f64) -> Result<DixmierEstimate> {
    Ok(dixmier_graded_complex(m, xi, tolerance, DEFAULT_MARGIN)?.re)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: DixmierEstimate,
    pub im: DixmierEstimate,
}

impl ComplexEstimate {
    pub fn value(&self) -> C64 {
        C64::new(self.re.value, self.im.value)
    }

    pub fn residual(&self) -> f64 {
        self.re.residual.hypot(self.im.residual)
    }

    pub fn converged(&self) -> bool {
        self.re.converged && self.im.converged
    }
}

/// Graded estimate with an explicit truncation margin.
///
/// The cumulative sums sigma_L over the first L shells are fitted as
/// D log L + C + sum_{p=1..4} e_p L^-p over the outer half of the usable shells;
/// D is the estimate. The residual is the larger of the scaled fit residual and
/// the change of D when the last correction term is dropped.
pub fn dixmier_graded_complex(m: &OperatorMatrix, xi: f64, tolerance: f64, margin: usize) -> Result<ComplexEstimate> {
    let nmax = m.basis().nmax();
    if nmax < 12 {
        return domain(format!("graded Dixmier estimate needs Nmax >= 12, got {nmax}"));
    }
    let top = nmax + 1 - margin.min(nmax + 1);
    if top < 10 {
        return domain(format!("margin {margin} leaves only {top} shells"));
    }
    let g = GradedDiagonal::from_operator(m, xi)?;
    let re: Vec<f64> = g.shell_sums.iter().map(|z| z.re).collect();
    let im: Vec<f64> = g.shell_sums.iter().map(|z| z.im).collect();
    Ok(ComplexEstimate {
        re: graded_fit(&re, top, tolerance)?,
        im: graded_fit(&im, top, tolerance)?,
    })
}

/// Graded estimate from real shell sums, using the first `top` shells.
pub fn graded_fit(shell_sums: &[f64], top: usize, tolerance: f64) -> Result<DixmierEstimate> {
    let mut acc = Kahan::default();
    let mut sigma = Vec::with_capacity(top);
    for &s in &shell_sums[..top] {
        acc.add(s);
        sigma.push(acc.sum);
    }
    let ls: Vec<f64> = ((top / 2)..=top).map(|l| l as f64).collect();
    let ys: Vec<f64> = ls.iter().map(|&l| sigma[l as usize - 1]).collect();
    let col = |l: f64, k: usize| match k {
        0 => l.ln(),
        1 => 1.0,
        p => l.powi(-(p as i32 - 1)),
    };
    let f6 = least_squares(&ls, &ys, 6, col)?;
    let f5 = least_squares(&ls, &ys, 5, col)?;
    let residual = (f6.max_residual / (top as f64).ln()).max((f6.coeffs[0] - f5.coeffs[0]).abs());
    let samples = ls
        .iter()
        .zip(&ys)
        .map(|(&l, &s)| (l, s / l.ln()))
        .collect();
    Ok(DixmierEstimate {
        value: f6.coeffs[0],
        method: EstimateMethod::GradedDiagonal,
        samples,
        converged: residual <= tolerance,
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurability {
    /// Mult mu_n ~ C/n: measurable with Dixmier value alpha C.
    Measurable,
    /// Mult mu_n decays faster than 1/n: Dixmier value 0.
    TraceClass,
    /// Mult mu_n decays slower than 1/n.
    NotInDixmierIdeal,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasurabilityReport {
    pub verdict: Measurability,
    /// Log-log slope of Mult mu_n over the tail.
    pub slope: f64,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub prediction: Option<f64>,
}

/// Tests Mult[mu_n] mu_n ~ C/n on the tail of the first 2^16 groups.
pub fn measurability_diagnostic(seq: &SingularSequence) -> MeasurabilityReport {
    const GROUPS: usize = 1 << 16;
    let mut prod = Vec::new();
    let mut cum = Vec::new();
    let mut total = 0usize;
    for n in 0..GROUPS {
        let Some((v, m)) = seq.group(n) else { break };
        if v <= 0.0 {
            break;
        }
        total += m;
        prod.push(m as f64 * v);
        cum.push(total as f64);
    }
    let trace_class = MeasurabilityReport {
        verdict: Measurability::TraceClass,
        slope: f64::NEG_INFINITY,
        c: None,
        alpha: None,
        prediction: Some(0.0),
    };
    let g = prod.len();
    if g < GROUPS {
        // Finitely many nonzero values.
        return trace_class;
    }
    // Log-spaced tail samples over [g/16, g); n counts groups from 1.
    let tail: Vec<usize> = (0..=32)
        .map(|k| {
            let t = k as f64 / 32.0;
            ((g as f64 / 16.0) * 16f64.powf(t)) as usize - 1
        })
        .collect();
    let logn: Vec<f64> = tail.iter().map(|&i| ((i + 1) as f64).ln()).collect();
    let logp: Vec<f64> = tail.iter().map(|&i| prod[i].ln()).collect();
    let Ok(fit) = least_squares(&logn, &logp, 2, |x, k| if k == 0 { 1.0 } else { x }) else {
        return inconclusive(f64::NAN);
    };
    let slope = fit.coeffs[1];
    if !slope.is_finite() {
        return inconclusive(slope);
    }
    if slope < -1.05 {
        return MeasurabilityReport { slope, ..trace_class };
    }
    if slope > -0.95 {
        return MeasurabilityReport {
            verdict: Measurability::NotInDixmierIdeal,
            slope,
            c: None,
            alpha: None,
            prediction: None,
        };
    }
    // C from n Mult mu_n = C + d/n; alpha from the log-log slope of the cumulative multiplicity.
    let ns: Vec<f64> = tail.iter().map(|&i| (i + 1) as f64).collect();
    let np: Vec<f64> = tail.iter().map(|&i| (i + 1) as f64 * prod[i]).collect();
    let logc: Vec<f64> = tail.iter().map(|&i| cum[i].ln()).collect();
    let (Ok(cf), Ok(af)) = (
        least_squares(&ns, &np, 3, |n, k| [1.0, 1.0 / n, 1.0 / (n * n)][k]),
        least_squares(&logn, &logc, 3, |x, k| [1.0, x, 1.0 / x][k]),
    ) else {
        return inconclusive(slope);
    };
    let c = cf.coeffs[0];
    let alpha = 1.0 / af.coeffs[1];
    MeasurabilityReport {
        verdict: Measurability::Measurable,
        slope,
        c: Some(c),
        alpha: Some(alpha),
        prediction: Some(alpha * c),
    }
}

fn inconclusive(slope: f64) -> MeasurabilityReport {
    MeasurabilityReport {
        verdict: Measurability::Inconclusive,
        slope,
        c: None,
        alpha: None,
        prediction: None,
    }
}

/// N^{(1-p)/p} sigma_N over a schedule; bounded values indicate membership in L^{p+}.
pub fn p_plus_profile(seq: &SingularSequence, p: f64, schedule: &[usize]) -> Result<Vec<(usize, f64)>> {
    if !(p >= 1.0) {
        return domain(format!("p must be >= 1, got {p}"));
    }
    let s = partial_sums_at(seq, schedule)?;
    Ok(schedule
        .iter()
        .zip(s)
        .map(|(&n, s)| (n, (n as f64).powf((1.0 - p) / p) * s))
        .collect())
}
