//! One line per acceptance criterion, run against the built binary. Runs
//! without the test harness so the lines always reach the console.
//!
//! Criteria listed in `KNOWN_RED` are reported faithfully but expected to
//! fail; the test breaks if one of them starts passing so the list and the
//! notes explaining it get revisited.

use std::process::Command;
use std::time::{Duration, Instant};

const KNOWN_RED: [usize; 3] = [5, 6, 7];

const UNCOUPLED_L2: [f64; 4] = [1.684735e-05, 2.098734e-06, 2.617986e-07, 3.268957e-08];
const COUPLED_GAMMA: [f64; 4] = [1.597969e-05, 2.077018e-06, 2.646097e-07, 3.338419e-08];
const DISLOCATION_L2: [f64; 4] = [1.226581e-02, 6.141691e-03, 3.073164e-03, 1.537180e-03];
const NORMS: [f64; 2] = [1.435134, 1.662724];

struct Run {
    code: Option<i32>,
    stdout: String,
    elapsed: Duration,
}

fn faultline(args: &[&str]) -> Run {
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_faultline")).args(args).output().expect("binary runs");
    Run { code: o.status.code(), stdout: String::from_utf8(o.stdout).unwrap(), elapsed: start.elapsed() }
}

/// Named columns of a CSV table, empty cells as NaN, `norms` row split off.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
    norms: Option<Vec<f64>>,
}

impl Table {
    fn parse(text: &str) -> Self {
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(str::to_string).collect();
        let cell = |c: &str| if c.is_empty() { f64::NAN } else { c.parse().unwrap() };
        let (mut rows, mut norms) = (Vec::new(), None);
        for l in lines {
            match l.strip_prefix("norms,") {
                Some(rest) => norms = Some(rest.split(',').map(cell).collect()),
                None => rows.push(l.split(',').map(cell).collect()),
            }
        }
        Self { header, rows, norms }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let k = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[k]).collect()
    }

    /// Column without the blank first entry of rate columns.
    fn tail(&self, name: &str) -> Vec<f64> {
        self.col(name)[1..].to_vec()
    }
}

fn converge(args: &[&str]) -> (Table, Run) {
    let run = faultline(&[&["converge", "--nmin", "8", "--nmax", "64"], args].concat());
    assert_eq!(run.code, Some(0), "converge {args:?} failed");
    (Table::parse(&run.stdout), run)
}

fn within(v: &[f64], lo: f64, hi: f64) -> bool {
    v.iter().all(|x| (lo..=hi).contains(x))
}

fn within_factor(got: &[f64], want: &[f64], factor: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(g, w)| g / w <= factor && w / g <= factor)
}

fn ratios(got: &[f64], want: &[f64]) -> Vec<f64> {
    got.iter().zip(want).map(|(g, w)| g / w).collect()
}

fn fmt(v: &[f64]) -> String {
    let cells: Vec<_> = v.iter().map(|x| if x.abs() >= 0.01 { format!("{x:.4}") } else { format!("{x:.3e}") }).collect();
    format!("[{}]", cells.join(", "))
}

/// Audit rows with the given check name: `(lhs, rhs, pass)`.
fn audit(text: &str, check: &str) -> Vec<(f64, f64, bool)> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|c| c[0] == check)
        .map(|c| (c[3].parse().unwrap(), c[4].parse().unwrap(), c[5] == "true"))
        .collect()
}

fn relative_spread(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn main() {
    let mut results: Vec<(usize, bool, String)> = Vec::new();

    let (t, run) = converge(&["--problem", "limit-uncoupled"]);
    let (r2, r1) = (t.tail("rate_l2_u"), t.tail("rate_h1_u"));
    results.push((
        1,
        within(&r2, 2.8, 3.2) && within(&r1, 1.85, 2.15) && run.elapsed < Duration::from_secs(120),
        format!("uncoupled rates L2 {} H1 {} in {:.1?}", fmt(&r2), fmt(&r1), run.elapsed),
    ));
    let l2 = t.col("l2_u");
    results.push((2, within_factor(&l2, &UNCOUPLED_L2, 3.0), format!("L2 error / reference {}", fmt(&ratios(&l2, &UNCOUPLED_L2)))));
    let norms = t.norms.clone().unwrap_or_default();
    let ok = norms.len() >= 2 && (norms[0] - NORMS[0]).abs() < 1e-4 && (norms[1] - NORMS[1]).abs() < 1e-4;
    results.push((3, ok, format!("exact norms {}", fmt(&norms[..2.min(norms.len())]))));

    let (t, _) = converge(&["--problem", "limit-coupled"]);
    let (r2, r1, rg) = (t.tail("rate_l2_u"), t.tail("rate_h1_u"), t.tail("rate_l2_gamma"));
    let g = t.col("l2_gamma");
    results.push((
        4,
        within(&r2, 2.8, 3.2) && within(&rg, 2.8, 3.2) && within(&r1, 1.85, 2.15) && within_factor(&g, &COUPLED_GAMMA, 3.0),
        format!("coupled rates L2 {} H1 {} slip {}; slip error / reference {}", fmt(&r2), fmt(&r1), fmt(&rg), fmt(&ratios(&g, &COUPLED_GAMMA))),
    ));

    let start = Instant::now();
    let (tu, _) = converge(&["--problem", "eps-uncoupled", "--eps", "0.1"]);
    let (tc, _) = converge(&["--problem", "eps-coupled", "--eps", "0.1"]);
    let elapsed = start.elapsed();
    let (u, c, g) = (tu.col("l2_u"), tc.col("l2_u"), tc.col("l2_gamma"));
    let n = u.len();
    let settled = [&u, &c, &g].iter().all(|v| relative_spread(v[n - 1], v[n - 2]) < 0.1);
    let ok = (u[n - 1] - 0.34).abs() <= 0.05 && (c[n - 1] - 0.16).abs() <= 0.03 && (g[n - 1] - 0.082).abs() <= 0.02;
    results.push((
        5,
        ok && settled && elapsed < Duration::from_secs(600),
        format!("plateaus uncoupled {:.4} coupled {:.4} slip {:.4} (settled: {settled}) in {elapsed:.1?}", u[n - 1], c[n - 1], g[n - 1]),
    ));

    let (t, _) = converge(&["--problem", "dislocation"]);
    let (r2, growth, l2) = (t.tail("rate_l2_u"), t.tail("growth_gamma_norm"), t.col("l2_u"));
    results.push((
        6,
        within(&r2, 0.9, 1.1) && within(&growth, 1.3, 1.5) && within_factor(&l2, &DISLOCATION_L2, 3.0),
        format!("dislocation L2 rates {} slip norm growth {} L2 / reference {}", fmt(&r2), fmt(&growth), fmt(&ratios(&l2, &DISLOCATION_L2))),
    ));

    let run = faultline(&["verify", "gamma"]);
    let gaps: Vec<f64> = audit(&run.stdout, "gamma").iter().map(|r| r.0).collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let final_ratio = gaps.last().unwrap() / gaps[0];
    results.push((7, decreasing && final_ratio < 0.25 && run.code == Some(0), format!("energy gaps {} final/first {final_ratio:.3}", fmt(&gaps))));

    let p = faultline(&["verify", "poincare"]);
    let c = faultline(&["verify", "coercivity"]);
    let cases = audit(&p.stdout, "poincare");
    let failures = cases.iter().filter(|r| !r.2).count();
    let coercive = ["coercivity_gradient", "coercivity_shear", "coercivity_l2"].iter().map(|k| audit(&c.stdout, k).len()).sum::<usize>();
    results.push((
        8,
        p.code == Some(0) && cases.len() >= 400 && failures == 0 && c.code == Some(0) && coercive > 0,
        format!("poincare {failures} failures over {} cases; coercivity {coercive} rows, exit {:?}", cases.len(), c.code),
    ));

    let run = faultline(&["verify", "plasticity"]);
    let residuals: Vec<f64> = audit(&run.stdout, "plasticity").iter().map(|r| r.0).collect();
    let factors: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    let closed = audit(&run.stdout, "plasticity_closed_form");
    let ok = factors.len() >= 3 && within(&factors, 3.5, 4.5) && closed.iter().all(|r| r.0 <= 1e-10) && !closed.is_empty();
    results.push((
        9,
        ok && run.code == Some(0),
        format!("residual factors {} closed form {:.1e}", fmt(&factors), closed.first().map_or(f64::NAN, |r| r.0)),
    ));

    let run = faultline(&["verify", "energy"]);
    let pick = |k: &str| audit(&run.stdout, k);
    let drift = pick("energy_conservation").first().map_or(f64::NAN, |r| r.0);
    let min_dissipation = pick("energy_dissipation").iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let order = pick("energy_order").first().map_or(f64::NAN, |r| r.0);
    let stationary = pick("energy_stationary").first().map_or(f64::NAN, |r| r.0);
    let ok = drift <= 1e-10 && min_dissipation >= 0.0 && (1.8..=2.2).contains(&order) && stationary <= 1e-6;
    results.push((
        10,
        ok && run.code == Some(0),
        format!("drift {drift:.1e} min dissipation {min_dissipation:.1e} order {order:.3} stationary {stationary:.1e}"),
    ));

    let args = ["converge", "--problem", "limit-coupled", "--nmin", "8", "--nmax", "32"];
    let (a, b) = (faultline(&args), faultline(&args));
    results.push((11, a.code == Some(0) && a.stdout == b.stdout, format!("{} bytes, identical: {}", a.stdout.len(), a.stdout == b.stdout)));

    for (k, pass, detail) in &results {
        let note = if KNOWN_RED.contains(k) { " (known red)" } else { "" };
        println!("criterion {k:>2}: {}{note}  {detail}", if *pass { "PASS" } else { "FAIL" });
    }
    for (k, pass, _) in &results {
        if KNOWN_RED.contains(k) {
            assert!(!pass, "criterion {k} now passes; drop it from KNOWN_RED and update the notes");
        } else {
            assert!(pass, "criterion {k} failed");
        }
    }
}
