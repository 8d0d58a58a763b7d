use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::gateset::{Mat4, Vec4};
use super::gauge::{gauge_optimize_group, GaugeGroup};
use super::{ExperimentDesign, GateSet, GateString, GstDataset};
use crate::{Error, Result};

/// Largest accepted `s₁/s₄` of the fiducial Gram matrix.
pub const MAX_GRAM_CONDITION: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LgstReport {
    pub gate_set: GateSet,
    /// All Gram singular values, descending.
    pub singular_values: Vec<f64>,
    pub condition_number: f64,
}

pub(crate) fn probability_table(data: &GstDataset) -> HashMap<&GateString, f64> {
    data.rows.iter().map(|r| (&r.sequence, r.probability)).collect()
}

/// Linear-inversion estimate in a gauge aligned with the ideal gate set and
/// made exactly trace preserving.
pub fn lgst(data: &GstDataset, design: &ExperimentDesign) -> Result<LgstReport> {
    let table = probability_table(data);
    let fids = &design.fiducials;
    let n = fids.len();
    if n < 4 {
        return Err(Error::InsufficientData("LGST needs at least 4 fiducials".into()));
    }
    let lookup = |s: GateString| {
        table
            .get(&s)
            .copied()
            .ok_or_else(|| Error::MissingSequence(s.to_string()))
    };
    let block = |body: &GateString| -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(n, n);
        for b in 0..n {
            for a in 0..n {
                m[(b, a)] = lookup(GateString::concat(&[&fids[a], body, &fids[b]]))?;
            }
        }
        Ok(m)
    };
    let gram = block(&GateString::empty())?;
    let svd = gram.clone().svd(true, true);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let condition_number = singular_values[0] / singular_values[3];
    if !condition_number.is_finite() || condition_number > MAX_GRAM_CONDITION {
        return Err(Error::IllConditioned(condition_number));
    }
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("Vᵀ requested");
    let u4 = DMatrix::from_fn(n, 4, |r, c| u[(r, order[c])]);
    let v4 = DMatrix::from_fn(n, 4, |r, c| v_t[(order[c], r)]);
    let to4 = |m: DMatrix<f64>| Mat4::from_fn(|r, c| m[(r, c)]);
    let core = to4(u4.transpose() * &gram * &v4);
    let core_inv = core.try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;

    let mut est = GateSet::ideal(&design.gate_labels);
    for &label in &design.gate_labels {
        let d = block(&GateString(vec![label]))?;
        est.set_gate(label, core_inv * to4(u4.transpose() * d * &v4));
    }
    let singles: Vec<f64> = fids.iter().map(|f| lookup(f.clone())).collect::<Result<_>>()?;
    let singles = DVector::from_vec(singles);
    est.rho = core_inv * Vec4::from_iterator((u4.transpose() * &singles).iter().copied());
    est.effect = Vec4::from_iterator((v4.transpose() * &singles).iter().copied());

    // Seed the gauge with the ideal fiducial states, then refine.
    let target = GateSet::ideal(&design.gate_labels);
    let mut prep_states = DMatrix::zeros(4, n);
    for (a, f) in fids.iter().enumerate() {
        let mut v = target.rho;
        for &l in f.labels() {
            v = target.gate(l)? * v;
        }
        prep_states.set_column(a, &v);
    }
    let seed_gauge = to4(prep_states * &v4);
    let aligned = est.transform(&seed_gauge)?;
    let aligned = gauge_optimize_group(&aligned, &target, GaugeGroup::Full, 1.0)?.gate_set;
    let gate_set = make_trace_preserving(&aligned)?;
    Ok(LgstReport {
        gate_set,
        singular_values,
        condition_number,
    })
}

/// Gauge transform sending the common left fixed point `t` of all gates
/// (scaled so `t·ρ = 1/√2`) to `(1, 0, 0, 0)`; first rows are then set exactly.
pub fn make_trace_preserving(g: &GateSet) -> Result<GateSet> {
    let labels = g.labels();
    let mut stacked = DMatrix::zeros(4, 4 * labels.len());
    for (k, &l) in labels.iter().enumerate() {
        let d = g.gate(l)? - Mat4::identity();
        stacked.view_mut((0, 4 * k), (4, 4)).copy_from(&d);
    }
    let svd = stacked.svd(true, false);
    let u = svd.u.expect("U requested");
    let smallest = (0..4)
        .min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))
        .expect("four singular values");
    let t = Vec4::from_iterator(u.column(smallest).iter().copied());
    let scale = t.dot(&g.rho) * 2f64.sqrt();
    if scale.abs() < 1e-12 {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let mut gauge = Mat4::identity();
    gauge.set_row(0, &(t / scale).transpose());
    let mut out = g.transform(&gauge)?;
    for l in labels {
        let mut m = *out.gate(l)?;
        m.set_row(0, &Vec4::new(1.0, 0.0, 0.0, 0.0).transpose());
        out.set_gate(l, m);
    }
    out.rho[0] = 1.0 / 2f64.sqrt();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gst::{apply_error_model, simulate_dataset, standard_design, ErrorModel, GateLabel};
    use crate::rb::Shots;

    fn max_prob_error(est: &GateSet, data: &GstDataset, max_len: usize, design: &ExperimentDesign) -> f64 {
        design
            .entries
            .iter()
            .zip(&data.rows)
            .filter(|(e, _)| e.max_length <= max_len)
            .map(|(_, r)| (est.probability(&r.sequence).unwrap() - r.probability).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn ideal_data_is_inverted_exactly() {
        let d = standard_design();
        let truth = GateSet::ideal(&GateLabel::STANDARD);
        let data = simulate_dataset(&truth, &d, Shots::Infinite, 0).unwrap();
        let rep = lgst(&data, &d).unwrap();
        assert!(rep.singular_values[4] < 1e-10);
        assert!(max_prob_error(&rep.gate_set, &data, 256, &d) < 1e-10);
        assert!(rep.gate_set.tp_deviation() == 0.0);
    }

    #[test]
    fn detuned_data_reproduces_short_circuits() {
        let d = standard_design();
        let truth = apply_error_model(
            &GateSet::ideal(&GateLabel::STANDARD),
            &ErrorModel::detuning(0.0444).unwrap(),
        );
        let data = simulate_dataset(&truth, &d, Shots::Infinite, 0).unwrap();
        let rep = lgst(&data, &d).unwrap();
        assert!(max_prob_error(&rep.gate_set, &data, 1, &d) < 1e-8);
    }

    #[test]
    fn finite_shot_residuals_within_binomial_band() {
        let d = standard_design();
        let truth = apply_error_model(
            &GateSet::ideal(&GateLabel::STANDARD),
            &ErrorModel::detuning(0.0444).unwrap(),
        );
        let n = 220;
        let data = simulate_dataset(&truth, &d, Shots::Finite(n), 4).unwrap();
        let rep = lgst(&data, &d).unwrap();
        for (e, r) in d.entries.iter().zip(&data.rows) {
            if e.max_length > 1 {
                continue;
            }
            let p = rep.gate_set.probability(&r.sequence).unwrap().clamp(0.0, 1.0);
            let band = 5.0 * ((p * (1.0 - p)).max(1.0 / n as f64) / n as f64).sqrt();
            assert!(
                (p - r.probability).abs() < band,
                "{}: {p} vs {}",
                r.sequence,
                r.probability
            );
        }
    }

    #[test]
    fn singular_gram_is_reported() {
        let d = standard_design();
        let mut truth = GateSet::ideal(&GateLabel::STANDARD);
        truth.effect = Vec4::new(1.0 / 2f64.sqrt(), 0.0, 0.0, 0.0);
        let data = simulate_dataset(&truth, &d, Shots::Infinite, 0).unwrap();
        assert!(matches!(lgst(&data, &d), Err(Error::IllConditioned(_))));
    }
}
