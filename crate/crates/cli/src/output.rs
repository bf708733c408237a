//! CSV and JSON renderings of run and sweep results.
//!
//! CSV: `,` delimiter, `.` decimal point, one header row, floats in shortest
//! round-trip form. The run table has one row per area (statistics pooled
//! over all replications) plus a final `overall` summary row whose cost
//! columns are the means of the per-replication means — the same quantity
//! the confidence interval describes.

use serde::Serialize;

use chargernet_core::assignment::Scheme;
use chargernet_core::scenario::Scenario;
use chargernet_core::simulator::{ReplicationSet, SweepPoint};
use chargernet_core::Scalar;

fn fmt(v: Scalar) -> String {
    format!("{v}")
}

struct PooledArea {
    area: u32,
    users: usize,
    mean_delay: Scalar,
    mean_price: Scalar,
    mean_overall: Scalar,
}

fn pool_areas(scenario: &Scenario, set: &ReplicationSet) -> Vec<PooledArea> {
    let areas = scenario.grid.area_count() as usize;
    let mut users = vec![0usize; areas];
    let mut delay = vec![0.0; areas];
    let mut price = vec![0.0; areas];
    let mut overall = vec![0.0; areas];
    for report in &set.reports {
        for am in &report.per_area {
            let i = (am.area - 1) as usize;
            users[i] += am.users;
            delay[i] += am.mean_delay_cost * am.users as Scalar;
            price[i] += am.mean_price_cost * am.users as Scalar;
            overall[i] += am.mean_overall_cost * am.users as Scalar;
        }
    }
    (0..areas)
        .map(|i| {
            let n = users[i];
            let div = |sum: Scalar| if n == 0 { 0.0 } else { sum / n as Scalar };
            PooledArea {
                area: i as u32 + 1,
                users: n,
                mean_delay: div(delay[i]),
                mean_price: div(price[i]),
                mean_overall: div(overall[i]),
            }
        })
        .collect()
}

fn rep_mean(
    set: &ReplicationSet,
    pick: impl Fn(&chargernet_core::simulator::MetricsReport) -> Scalar,
) -> Scalar {
    if set.reports.is_empty() {
        return 0.0;
    }
    set.reports.iter().map(pick).sum::<Scalar>() / set.reports.len() as Scalar
}

pub fn run_csv(scenario: &Scenario, set: &ReplicationSet) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "area",
        "mean_delay_cost",
        "mean_price_cost",
        "mean_overall_cost",
        "users",
    ])
    .expect("in-memory write");
    for row in pool_areas(scenario, set) {
        w.write_record([
            row.area.to_string(),
            fmt(row.mean_delay),
            fmt(row.mean_price),
            fmt(row.mean_overall),
            row.users.to_string(),
        ])
        .expect("in-memory write");
    }
    let total_users: usize = set.reports.iter().map(|r| r.users).sum();
    w.write_record([
        "overall".to_string(),
        fmt(rep_mean(set, |r| r.mean_delay_cost)),
        fmt(rep_mean(set, |r| r.mean_price_cost)),
        fmt(set.summary.mean),
        total_users.to_string(),
    ])
    .expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

#[derive(Serialize)]
struct AreaRow {
    area: u32,
    mean_delay_cost: Scalar,
    mean_price_cost: Scalar,
    mean_overall_cost: Scalar,
    users: usize,
}

#[derive(Serialize)]
struct RunSummary {
    mean_overall_cost: Scalar,
    mean_delay_cost: Scalar,
    mean_price_cost: Scalar,
    mean_estimated_overall_cost: Scalar,
    std_dev: Scalar,
    ci95_low: Scalar,
    ci95_high: Scalar,
    replications: usize,
    users: usize,
}

#[derive(Serialize)]
struct RunDocument {
    scheme: Scheme,
    seeds: Vec<u64>,
    per_area: Vec<AreaRow>,
    summary: RunSummary,
}

pub fn run_json(
    scenario: &Scenario,
    scheme: Scheme,
    seeds: &[u64],
    set: &ReplicationSet,
) -> String {
    let per_area = pool_areas(scenario, set)
        .into_iter()
        .map(|row| AreaRow {
            area: row.area,
            mean_delay_cost: row.mean_delay,
            mean_price_cost: row.mean_price,
            mean_overall_cost: row.mean_overall,
            users: row.users,
        })
        .collect();
    let doc = RunDocument {
        scheme,
        seeds: seeds.to_vec(),
        per_area,
        summary: RunSummary {
            mean_overall_cost: set.summary.mean,
            mean_delay_cost: rep_mean(set, |r| r.mean_delay_cost),
            mean_price_cost: rep_mean(set, |r| r.mean_price_cost),
            mean_estimated_overall_cost: rep_mean(set, |r| r.mean_estimated_overall_cost),
            std_dev: set.summary.std_dev,
            ci95_low: set.summary.ci95_low,
            ci95_high: set.summary.ci95_high,
            replications: set.summary.n,
            users: set.reports.iter().map(|r| r.users).sum(),
        },
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "ratio",
        "scheme",
        "mean_overall_cost",
        "ci95_low",
        "ci95_high",
    ])
    .expect("in-memory write");
    for p in points {
        w.write_record([
            fmt(p.ratio),
            p.scheme.to_string(),
            fmt(p.summary.mean),
            fmt(p.summary.ci95_low),
            fmt(p.summary.ci95_high),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

#[derive(Serialize)]
struct SweepRow {
    ratio: Scalar,
    scheme: Scheme,
    mean_overall_cost: Scalar,
    ci95_low: Scalar,
    ci95_high: Scalar,
}

pub fn sweep_json(points: &[SweepPoint]) -> String {
    let rows: Vec<SweepRow> = points
        .iter()
        .map(|p| SweepRow {
            ratio: p.ratio,
            scheme: p.scheme,
            mean_overall_cost: p.summary.mean,
            ci95_low: p.summary.ci95_low,
            ci95_high: p.summary.ci95_high,
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows).expect("rows serialize");
    text.push('\n');
    text
}
