//! Performance measures and nonparametric comparisons.
//!
//! Two methods are compared with the Wilcoxon signed-rank test. Several
//! methods over several data sets go through a Friedman test on per-row
//! ranks (rank 1 = highest accuracy) followed, when significant, by Conover's
//! pairwise procedure with Holm's step-down adjustment.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("need at least {needed} non-zero differences, got {got}")]
    TooFewPairs { needed: usize, got: usize },
    #[error("need at least 2 complete rows, got {0}")]
    TooFewRows(usize),
    #[error("need at least 2 methods, got {0}")]
    TooFewMethods(usize),
    #[error("malformed result matrix: {0}")]
    Malformed(String),
}

/// Mean per-class recall over the classes present in `y_true`.
pub fn balanced_accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64, StatsError> {
    if y_true.len() != y_pred.len() {
        return Err(StatsError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut per_class: HashMap<usize, (usize, usize)> = HashMap::new();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let e = per_class.entry(t).or_default();
        e.1 += 1;
        if t == p {
            e.0 += 1;
        }
    }
    let mut classes: Vec<_> = per_class.into_iter().collect();
    classes.sort_unstable_by_key(|(c, _)| *c);
    let sum: f64 = classes.iter().map(|(_, (hit, n))| *hit as f64 / *n as f64).sum();
    Ok(sum / classes.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    TwoSided,
    /// `a` tends to be larger than `b`.
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    /// Sum of the ranks of the positive differences `a - b`.
    pub statistic: f64,
    pub p_value: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub method: WilcoxonMethod,
    /// Every difference was zero; `p_value` is 1 by convention.
    pub degenerate: bool,
}

/// Largest sample size handled with the exact null distribution.
pub const WILCOXON_EXACT_MAX: usize = 25;
/// Minimum number of non-zero differences accepted.
pub const WILCOXON_MIN_PAIRS: usize = 5;

/// Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped and tied absolute differences get average
/// ranks. Up to [`WILCOXON_EXACT_MAX`] pairs the p-value comes from the exact
/// permutation distribution of the observed ranks (ties included); above it,
/// from the normal approximation with tie and continuity corrections.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alternative: Alternative) -> Result<WilcoxonResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            p_value: 1.0,
            n: 0,
            method: WilcoxonMethod::Exact,
            degenerate: true,
        });
    }
    if n < WILCOXON_MIN_PAIRS {
        return Err(StatsError::TooFewPairs {
            needed: WILCOXON_MIN_PAIRS,
            got: n,
        });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks_ascending(&abs);
    let w_plus: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();

    if n <= WILCOXON_EXACT_MAX {
        let dist = SignedRankDistribution::new(&ranks);
        let upper = dist.upper_tail(w_plus);
        let p = match alternative {
            Alternative::Greater => upper,
            Alternative::TwoSided => (2.0 * upper.min(dist.lower_tail(w_plus))).min(1.0),
        };
        return Ok(WilcoxonResult {
            statistic: w_plus,
            p_value: p,
            n,
            method: WilcoxonMethod::Exact,
            degenerate: false,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes(&abs).map(|t| t * t * t - t).sum();
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let sd = var.sqrt();
    let normal = Normal::standard();
    let p = match alternative {
        Alternative::Greater => normal.sf((w_plus - mean - 0.5) / sd),
        Alternative::TwoSided => {
            let z = ((w_plus - mean).abs() - 0.5).max(0.0) / sd;
            (2.0 * normal.sf(z)).min(1.0)
        }
    };
    Ok(WilcoxonResult {
        statistic: w_plus,
        p_value: p,
        n,
        method: WilcoxonMethod::Normal,
        degenerate: false,
    })
}

/// Null distribution of the positive-rank sum when each rank's sign is an
/// independent fair coin. Average ranks are handled by working in half-rank
/// units.
#[derive(Debug, Clone)]
pub struct SignedRankDistribution {
    /// `pmf[s]` = P(2·W⁺ = s).
    pmf: Vec<f64>,
}

impl SignedRankDistribution {
    pub fn new(ranks: &[f64]) -> Self {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let max: usize = doubled.iter().sum();
        let mut counts = vec![0.0f64; max + 1];
        counts[0] = 1.0;
        let mut reach = 0;
        for &r in &doubled {
            for s in (0..=reach).rev() {
                let c = counts[s];
                if c != 0.0 {
                    counts[s + r] += c;
                }
            }
            reach += r;
        }
        let total = 2f64.powi(ranks.len() as i32);
        Self {
            pmf: counts.into_iter().map(|c| c / total).collect(),
        }
    }

    /// Probability masses indexed by twice the rank sum.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    fn index(w: f64) -> usize {
        (2.0 * w).round() as usize
    }

    /// `P(W⁺ ≥ w)`.
    pub fn upper_tail(&self, w: f64) -> f64 {
        let i = Self::index(w);
        self.pmf.iter().skip(i).sum::<f64>().min(1.0)
    }

    /// `P(W⁺ ≤ w)`.
    pub fn lower_tail(&self, w: f64) -> f64 {
        let i = Self::index(w);
        self.pmf.iter().take(i + 1).sum::<f64>().min(1.0)
    }
}

/// 1-based average ranks, smallest value first.
pub fn average_ranks_ascending(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn tie_sizes(values: &[f64]) -> impl Iterator<Item = f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > 1 {
            sizes.push((j - i) as f64);
        }
        i = j;
    }
    sizes.into_iter()
}

/// Per-data-set, per-method scores; `None` marks a missing entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultMatrix {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

/// Missing-cell markers accepted when reading a matrix.
const MISSING_MARKERS: [&str; 3] = ["", "x", "--"];

impl ResultMatrix {
    pub fn new(datasets: Vec<String>, methods: Vec<String>, cells: Vec<Vec<Option<f64>>>) -> Result<Self, StatsError> {
        if cells.len() != datasets.len() {
            return Err(StatsError::Malformed(format!(
                "{} rows for {} data sets",
                cells.len(),
                datasets.len()
            )));
        }
        if let Some(row) = cells.iter().find(|r| r.len() != methods.len()) {
            return Err(StatsError::Malformed(format!(
                "row of {} cells for {} methods",
                row.len(),
                methods.len()
            )));
        }
        if cells.iter().flatten().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(StatsError::Malformed("score outside [0, 1]".into()));
        }
        Ok(Self {
            datasets,
            methods,
            cells,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.datasets.len()
    }

    pub fn n_methods(&self) -> usize {
        self.methods.len()
    }

    /// Reads a `dataset,<method>,...` CSV. Empty cells, `x` and `--` are missing.
    pub fn from_csv(text: &str) -> Result<Self, StatsError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| StatsError::Malformed(e.to_string()))?
            .clone();
        if header.get(0) != Some("dataset") {
            return Err(StatsError::Malformed("first column must be `dataset`".into()));
        }
        let methods: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut datasets = Vec::new();
        let mut cells = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| StatsError::Malformed(e.to_string()))?;
            datasets.push(rec[0].to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|tok| {
                    if MISSING_MARKERS.contains(&tok) {
                        Ok(None)
                    } else {
                        tok.parse::<f64>()
                            .map(Some)
                            .map_err(|_| StatsError::Malformed(format!("bad cell `{tok}`")))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            cells.push(row);
        }
        Self::new(datasets, methods, cells)
    }

    /// Writes the CSV form; missing cells become `x`, scores use `precision`
    /// decimals.
    pub fn to_csv(&self, precision: usize) -> String {
        let mut out = String::from("dataset");
        for m in &self.methods {
            out.push(',');
            out.push_str(m);
        }
        out.push('\n');
        for (name, row) in self.datasets.iter().zip(&self.cells) {
            out.push_str(name);
            for cell in row {
                match cell {
                    Some(v) => write!(out, ",{v:.precision$}").expect("string write"),
                    None => out.push_str(",x"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Column-wise union of several matrices, joined on data set name.
    /// Data sets absent from a matrix get missing cells for its methods.
    pub fn merge(parts: &[ResultMatrix]) -> Result<Self, StatsError> {
        let mut datasets: Vec<String> = Vec::new();
        for p in parts {
            for d in &p.datasets {
                if !datasets.contains(d) {
                    datasets.push(d.clone());
                }
            }
        }
        let mut methods = Vec::new();
        let mut cells = vec![Vec::new(); datasets.len()];
        for p in parts {
            for (j, m) in p.methods.iter().enumerate() {
                if methods.contains(m) {
                    return Err(StatsError::Malformed(format!("duplicate method `{m}`")));
                }
                methods.push(m.clone());
                for (i, d) in datasets.iter().enumerate() {
                    let v = p.datasets.iter().position(|x| x == d).and_then(|r| p.cells[r][j]);
                    cells[i].push(v);
                }
            }
        }
        Self::new(datasets, methods, cells)
    }

    /// Reorders (or selects) methods by index.
    pub fn select_methods(&self, order: &[usize]) -> Self {
        Self {
            datasets: self.datasets.clone(),
            methods: order.iter().map(|&j| self.methods[j].clone()).collect(),
            cells: self
                .cells
                .iter()
                .map(|row| order.iter().map(|&j| row[j]).collect())
                .collect(),
        }
    }
}

/// How rows with missing cells enter the rank-based tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// Drop every row with a missing cell.
    #[default]
    CompleteCase,
    /// Keep all rows; missing cells tie for the worst ranks.
    WorstRank,
}

impl std::str::FromStr for MissingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "complete-case" => Ok(MissingPolicy::CompleteCase),
            "worst-rank" => Ok(MissingPolicy::WorstRank),
            other => Err(format!(
                "unknown missing-data policy `{other}` (expected complete-case or worst-rank)"
            )),
        }
    }
}

impl fmt::Display for MissingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissingPolicy::CompleteCase => "complete-case",
            MissingPolicy::WorstRank => "worst-rank",
        })
    }
}

/// Per-row ranks, 1 = best (highest), ties averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub rows: Vec<usize>,
    pub ranks: Vec<Vec<f64>>,
    /// Per-row tie group sizes, for tie corrections.
    ties: Vec<Vec<f64>>,
}

impl RankTable {
    pub fn build(matrix: &ResultMatrix, policy: MissingPolicy) -> Result<Self, StatsError> {
        let m = matrix.n_methods();
        if m < 2 {
            return Err(StatsError::TooFewMethods(m));
        }
        let mut rows = Vec::new();
        let mut ranks = Vec::new();
        let mut ties = Vec::new();
        for (i, row) in matrix.cells.iter().enumerate() {
            let complete = row.iter().all(Option::is_some);
            if !complete && policy == MissingPolicy::CompleteCase {
                continue;
            }
            // Ranking the negated scores ascending puts the best first;
            // missing cells become +inf and share the last ranks.
            let keys: Vec<f64> = row.iter().map(|c| c.map_or(f64::INFINITY, |v| -v)).collect();
            ranks.push(average_ranks_ascending(&keys));
            ties.push(tie_sizes(&keys).collect());
            rows.push(i);
        }
        if rows.len() < 2 {
            return Err(StatsError::TooFewRows(rows.len()));
        }
        Ok(Self { rows, ranks, ties })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_methods(&self) -> usize {
        self.ranks[0].len()
    }

    pub fn rank_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_methods()];
        for row in &self.ranks {
            for (s, r) in sums.iter_mut().zip(row) {
                *s += r;
            }
        }
        sums
    }

    pub fn mean_ranks(&self) -> Vec<f64> {
        let n = self.n_rows() as f64;
        self.rank_sums().into_iter().map(|s| s / n).collect()
    }

    /// Friedman statistic with the usual tie correction.
    fn friedman_statistic(&self) -> f64 {
        let n = self.n_rows() as f64;
        let k = self.n_methods() as f64;
        let sum_sq: f64 = self.rank_sums().iter().map(|r| r * r).sum();
        let raw = 12.0 / (n * k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0);
        let tie_term: f64 = self.ties.iter().flatten().map(|t| t * t * t - t).sum();
        let correction = 1.0 - tie_term / (n * (k * k * k - k));
        if correction <= 0.0 {
            0.0
        } else {
            (raw / correction).max(0.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    pub degrees_of_freedom: usize,
    pub mean_ranks: Vec<f64>,
    /// Matrix rows that entered the test.
    pub rows_used: Vec<usize>,
}

pub fn friedman(matrix: &ResultMatrix, policy: MissingPolicy) -> Result<FriedmanResult, StatsError> {
    let table = RankTable::build(matrix, policy)?;
    let statistic = table.friedman_statistic();
    let df = table.n_methods() - 1;
    let p_value = if statistic > 0.0 {
        ChiSquared::new(df as f64).expect("df >= 1").sf(statistic)
    } else {
        1.0
    };
    Ok(FriedmanResult {
        statistic,
        p_value,
        degrees_of_freedom: df,
        mean_ranks: table.mean_ranks(),
        rows_used: table.rows,
    })
}

/// Holm step-down adjustment, returned in input order.
pub fn holm_adjust(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]));
    let mut adjusted = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (step, &i) in order.iter().enumerate() {
        let scaled = ((m - step) as f64 * p_values[i]).min(1.0);
        running = running.max(scaled);
        adjusted[i] = running;
    }
    adjusted
}

/// Symmetric table of pairwise p-values; the diagonal is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseTable {
    pub methods: Vec<String>,
    pub raw: Vec<Vec<Option<f64>>>,
    pub adjusted: Vec<Vec<Option<f64>>>,
}

/// Conover's post-hoc test on Friedman ranks with Holm-adjusted p-values.
///
/// For methods `i` and `j` with rank sums `R_i`, `R_j` over `N` rows and `k`
/// methods, `t = |R_i - R_j| / sqrt(2N(A - C)/((N-1)(k-1)) · (1 - T/(N(k-1))))`
/// where `A` is the sum of squared ranks, `C = Nk(k+1)²/4` and `T` the
/// tie-corrected Friedman statistic; `t` is referred to a Student
/// distribution with `(N-1)(k-1)` degrees of freedom.
pub fn conover_holm(matrix: &ResultMatrix, policy: MissingPolicy) -> Result<PairwiseTable, StatsError> {
    let table = RankTable::build(matrix, policy)?;
    let n = table.n_rows() as f64;
    let k = table.n_methods();
    let kf = k as f64;
    let sums = table.rank_sums();
    let a: f64 = table.ranks.iter().flatten().map(|r| r * r).sum();
    let c = n * kf * (kf + 1.0) * (kf + 1.0) / 4.0;
    let t_stat = table.friedman_statistic();
    let df = (n - 1.0) * (kf - 1.0);
    let spread = 2.0 * n * (a - c) / df * (1.0 - t_stat / (n * (kf - 1.0)));
    let student = StudentsT::new(0.0, 1.0, df).expect("df > 0");

    let mut pairs = Vec::new();
    let mut raw_p = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let diff = (sums[i] - sums[j]).abs();
            let p = if spread > 0.0 {
                (2.0 * student.sf(diff / spread.sqrt())).min(1.0)
            } else if diff == 0.0 {
                1.0
            } else {
                0.0
            };
            pairs.push((i, j));
            raw_p.push(p);
        }
    }
    let adj = holm_adjust(&raw_p);
    let mut raw = vec![vec![None; k]; k];
    let mut adjusted = vec![vec![None; k]; k];
    for ((&(i, j), &p), &q) in pairs.iter().zip(&raw_p).zip(&adj) {
        raw[i][j] = Some(p);
        raw[j][i] = Some(p);
        adjusted[i][j] = Some(q);
        adjusted[j][i] = Some(q);
    }
    Ok(PairwiseTable {
        methods: matrix.methods.clone(),
        raw,
        adjusted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deficit {
    pub method: String,
    /// Largest gap to the best method of a row.
    pub max: f64,
    /// Mean gap over rows where the method is present.
    pub mean: f64,
    pub rows: usize,
}

/// For each method, the gap to the best present score of each row where the
/// method itself is present.
pub fn deficit_summary(matrix: &ResultMatrix) -> Vec<Deficit> {
    let best: Vec<Option<f64>> = matrix
        .cells
        .iter()
        .map(|row| row.iter().flatten().copied().reduce(f64::max))
        .collect();
    (0..matrix.n_methods())
        .map(|j| {
            let gaps: Vec<f64> = matrix
                .cells
                .iter()
                .zip(&best)
                .filter_map(|(row, b)| Some(b.as_ref()? - row[j]?))
                .collect();
            let rows = gaps.len();
            Deficit {
                method: matrix.methods[j].clone(),
                max: gaps.iter().copied().fold(0.0, f64::max),
                mean: if rows > 0 {
                    gaps.iter().sum::<f64>() / rows as f64
                } else {
                    f64::NAN
                },
                rows,
            }
        })
        .collect()
}

/// Full two-stage comparison of a result matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub methods: Vec<String>,
    pub policy: MissingPolicy,
    pub alpha: f64,
    pub friedman: FriedmanResult,
    /// Present only when the Friedman test rejects at `alpha`.
    pub posthoc: Option<PairwiseTable>,
    pub deficits: Vec<Deficit>,
}

impl ComparisonReport {
    pub fn compute(matrix: &ResultMatrix, policy: MissingPolicy, alpha: f64) -> Result<Self, StatsError> {
        let friedman = friedman(matrix, policy)?;
        let posthoc = if friedman.p_value < alpha {
            Some(conover_holm(matrix, policy)?)
        } else {
            None
        };
        Ok(Self {
            methods: matrix.methods.clone(),
            policy,
            alpha,
            friedman,
            posthoc,
            deficits: deficit_summary(matrix),
        })
    }

    /// Method indices sorted by mean rank, best first (stable on ties).
    pub fn rank_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.methods.len()).collect();
        order.sort_by(|&a, &b| self.friedman.mean_ranks[a].total_cmp(&self.friedman.mean_ranks[b]));
        order
    }

    pub fn ranks_csv(&self) -> String {
        let mut out = String::from("method,mean_rank\n");
        for i in self.rank_order() {
            writeln!(out, "{},{:.3}", self.methods[i], self.friedman.mean_ranks[i]).expect("write");
        }
        out
    }

    pub fn friedman_csv(&self) -> String {
        format!(
            "statistic,df,p_value,rows_used,policy\n{:.6},{},{:e},{},{}\n",
            self.friedman.statistic,
            self.friedman.degrees_of_freedom,
            self.friedman.p_value,
            self.friedman.rows_used.len(),
            self.policy
        )
    }

    pub fn deficits_csv(&self) -> String {
        let mut out = String::from("method,max,avg,rows\n");
        for d in &self.deficits {
            writeln!(out, "{},{:.3},{:.3},{}", d.method, d.max, d.mean, d.rows).expect("write");
        }
        out
    }

    /// Adjusted p-values as a full square CSV, empty on the diagonal.
    pub fn posthoc_csv(&self) -> Option<String> {
        let table = self.posthoc.as_ref()?;
        let mut out = String::from("method");
        for m in &table.methods {
            write!(out, ",{m}").expect("write");
        }
        out.push('\n');
        for (m, row) in table.methods.iter().zip(&table.adjusted) {
            out.push_str(m);
            for cell in row {
                match cell {
                    Some(p) => write!(out, ",{p:.6}").expect("write"),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        Some(out)
    }

    /// Aligned plain-text summary.
    pub fn to_text(&self) -> String {
        let width = self.methods.iter().map(String::len).max().unwrap_or(6).max(6);
        let mut out = String::new();
        writeln!(
            out,
            "Friedman test ({} rows, {} policy): statistic = {:.4}, df = {}, p = {:.3e}",
            self.friedman.rows_used.len(),
            self.policy,
            self.friedman.statistic,
            self.friedman.degrees_of_freedom,
            self.friedman.p_value
        )
        .expect("write");
        out.push('\n');
        writeln!(out, "{:<width$}  {:>9}", "method", "mean rank").expect("write");
        for i in self.rank_order() {
            writeln!(out, "{:<width$}  {:>9.3}", self.methods[i], self.friedman.mean_ranks[i]).expect("write");
        }
        out.push('\n');
        match &self.posthoc {
            None => writeln!(out, "Friedman p >= {}: no post-hoc comparison.", self.alpha).expect("write"),
            Some(table) => {
                writeln!(out, "Conover post-hoc, Holm-adjusted p-values:").expect("write");
                write!(out, "{:<width$}", "").expect("write");
                for m in &table.methods[1..] {
                    write!(out, "  {:>width$}", m).expect("write");
                }
                out.push('\n');
                for i in 0..table.methods.len() - 1 {
                    write!(out, "{:<width$}", table.methods[i]).expect("write");
                    for j in 1..table.methods.len() {
                        let cell = if j <= i {
                            String::new()
                        } else {
                            match table.adjusted[i][j] {
                                Some(p) if p < 0.001 => "<0.001".to_string(),
                                Some(p) => format!("{p:.3}"),
                                None => String::new(),
                            }
                        };
                        write!(out, "  {cell:>width$}").expect("write");
                    }
                    out.push('\n');
                }
            }
        }
        out.push('\n');
        writeln!(out, "{:<width$}  {:>7}  {:>7}", "method", "max", "avg").expect("write");
        for d in &self.deficits {
            writeln!(out, "{:<width$}  {:>7.3}  {:>7.3}", d.method, d.max, d.mean).expect("write");
        }
        out
    }
}
