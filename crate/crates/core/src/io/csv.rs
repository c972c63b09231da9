//! Plain CSV for trajectories and metrics. Values are written with 12
//! significant digits; column labels use 1-based node ids.

use std::io::{self, BufRead, Write};

use crate::analysis::MetricSample;
use crate::dynamics::{wrap_tau, CoordinateMap, Trajectory};
use crate::graph::Digraph;

fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn trajectory_header(g: &Digraph, error_nodes: &[usize]) -> Vec<String> {
    let n = g.node_count();
    let mut cols = Vec::with_capacity(1 + n + error_nodes.len() + g.edge_count());
    cols.push("t".to_string());
    cols.extend((1..=n).map(|i| format!("theta_{i}")));
    cols.extend(error_nodes.iter().map(|i| format!("e_{}", i + 1)));
    cols.extend(g.edges().iter().map(|(i, j)| format!("k_{}_{}", i + 1, j + 1)));
    cols
}

/// One row per sample: time, phases wrapped into `[0, 2π)`, phase errors of
/// the non-representative nodes, and edge couplings in edge order.
pub fn write_trajectory<W: Write>(
    mut out: W,
    g: &Digraph,
    map: &CoordinateMap,
    traj: &Trajectory,
) -> io::Result<()> {
    writeln!(out, "{}", trajectory_header(g, map.error_nodes()).join(","))?;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![num(*t)];
        row.extend(state.theta.iter().map(|&x| num(wrap_tau(x))));
        row.extend(map.phase_errors(&state.theta).into_iter().map(num));
        row.extend(state.k.iter().map(|&x| num(x)));
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

pub fn write_metrics<W: Write>(mut out: W, metrics: &[MetricSample]) -> io::Result<()> {
    writeln!(out, "t,max_abs_error,intra_residual,inter_norm")?;
    for m in metrics {
        writeln!(
            out,
            "{},{},{},{}",
            num(m.t),
            num(m.max_abs_error),
            num(m.intra_residual),
            num(m.inter_norm)
        )?;
    }
    out.flush()
}

/// A numeric CSV table as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn read_table<R: BufRead>(input: R) -> io::Result<Table> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = input.lines();
    let header: Vec<String> = match lines.next() {
        Some(line) => line?.split(',').map(str::to_string).collect(),
        None => return Err(bad("empty file".into())),
    };
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("line {}: {e}", idx + 2)))?;
        if row.len() != header.len() {
            return Err(bad(format!(
                "line {}: {} fields, header has {}",
                idx + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, PlasticNetwork, SimState, StepSettings};
    use crate::presets;

    #[test]
    fn header_matches_column_count() {
        let g = presets::example2_graph();
        let p = presets::example2_partition();
        let h = trajectory_header(&g, &p.error_nodes());
        assert_eq!(h.len(), 1 + 7 + 5 + 14);
        assert_eq!(h[1], "theta_1");
        assert_eq!(h[8], "e_1");
        assert_eq!(h[13], "k_1_2");
    }

    #[test]
    fn round_trip_within_tolerance() {
        let spec = presets::example1_spec();
        let p = presets::example1_partition();
        let net = PlasticNetwork::new(&spec, Some(&p)).unwrap();
        let map = CoordinateMap::new(&spec, &p).unwrap();
        let init = SimState::new(presets::example1_initial_theta(), presets::example1_initial_k(1));
        let traj = integrate(&net, Some(&map), &init, &StepSettings::new(0.01, 50.0, 37), |_, _| {}).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &spec.graph, &map, &traj).unwrap();
        let table = read_table(buf.as_slice()).unwrap();
        assert_eq!(table.rows.len(), traj.len());
        for (row, (t, s)) in table.rows.iter().zip(traj.times.iter().zip(&traj.states)) {
            assert!((row[0] - t).abs() < 1e-9);
            for i in 0..5 {
                assert!((row[1 + i] - wrap_tau(s.theta[i])).abs() < 1e-9);
            }
            for (x, k) in row[1 + 5 + 3..].iter().zip(&s.k) {
                assert!((x - k).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(read_table("a,b\n1,2\n3\n".as_bytes()).is_err());
        assert!(read_table("a,b\n1,x\n".as_bytes()).is_err());
        assert!(read_table("".as_bytes()).is_err());
    }
}
