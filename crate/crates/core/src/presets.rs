//! Bundled run configurations for the figure experiments. `*_desk`
//! variants use 101×101 grids and 200-period horizons; the others use the
//! full 401×401 grids and 2000 periods.

use crate::config::RunConfiguration;
use crate::{Error, Result};

const PRESETS: &[(&str, &str)] = &[
    ("csi_fig1_a", include_str!("../presets/csi_fig1_a.json")),
    ("csi_fig1_a_desk", include_str!("../presets/csi_fig1_a_desk.json")),
    ("csi_fig1_b", include_str!("../presets/csi_fig1_b.json")),
    ("csi_fig1_b_desk", include_str!("../presets/csi_fig1_b_desk.json")),
    ("csi_fig1_c", include_str!("../presets/csi_fig1_c.json")),
    ("csi_fig1_c_desk", include_str!("../presets/csi_fig1_c_desk.json")),
    ("csi_fig1_d", include_str!("../presets/csi_fig1_d.json")),
    ("csi_fig1_d_desk", include_str!("../presets/csi_fig1_d_desk.json")),
    ("csi_fig1_e", include_str!("../presets/csi_fig1_e.json")),
    ("csi_fig1_e_desk", include_str!("../presets/csi_fig1_e_desk.json")),
    ("csi_fig1_f", include_str!("../presets/csi_fig1_f.json")),
    ("csi_fig1_f_desk", include_str!("../presets/csi_fig1_f_desk.json")),
    ("csi_fig2_a", include_str!("../presets/csi_fig2_a.json")),
    ("csi_fig2_a_desk", include_str!("../presets/csi_fig2_a_desk.json")),
    ("csi_fig2_b", include_str!("../presets/csi_fig2_b.json")),
    ("csi_fig2_b_desk", include_str!("../presets/csi_fig2_b_desk.json")),
    ("csi_fig2_c", include_str!("../presets/csi_fig2_c.json")),
    ("csi_fig2_c_desk", include_str!("../presets/csi_fig2_c_desk.json")),
    ("csi_fig2_d", include_str!("../presets/csi_fig2_d.json")),
    ("csi_fig2_d_desk", include_str!("../presets/csi_fig2_d_desk.json")),
    ("csi_fig2_e", include_str!("../presets/csi_fig2_e.json")),
    ("csi_fig2_e_desk", include_str!("../presets/csi_fig2_e_desk.json")),
    ("csi_fig2_f", include_str!("../presets/csi_fig2_f.json")),
    ("csi_fig2_f_desk", include_str!("../presets/csi_fig2_f_desk.json")),
    ("harmonic_fig1_a", include_str!("../presets/harmonic_fig1_a.json")),
    ("harmonic_fig1_b", include_str!("../presets/harmonic_fig1_b.json")),
    ("harmonic_fig1_c", include_str!("../presets/harmonic_fig1_c.json")),
    ("harmonic_fig1_d", include_str!("../presets/harmonic_fig1_d.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Looks up a preset; `csi_fig2a_desk` is accepted for `csi_fig2_a_desk`.
pub fn get(name: &str) -> Result<RunConfiguration> {
    let text = PRESETS
        .iter()
        .find(|(n, _)| *n == name || n.replacen("fig1_", "fig1", 1).replacen("fig2_", "fig2", 1) == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Config(format!("no preset named `{name}`")))?;
    RunConfiguration::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::SystemModel;

    #[test]
    fn every_preset_resolves() {
        assert_eq!(names().count(), 28);
        for n in names() {
            let c = get(n).unwrap();
            assert_eq!(c.name, n);
            let r = c.resolve().unwrap();
            let (n0, n1) = r.domain.dims();
            if n.ends_with("_desk") {
                assert_eq!((n0, n1), (101, 101));
            }
            if n.starts_with("csi") {
                let periods = r.integrator.horizon / r.model.forcing().base_period();
                let expect = if n.ends_with("_desk") { 200.0 } else { 2000.0 };
                assert!((periods - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn figure_windows_and_phases() {
        let a = get("csi_fig1_a_desk").unwrap().resolve().unwrap();
        assert_eq!((a.domain.axes[0].lo, a.domain.axes[0].hi), (1.0, 2.0));
        assert_eq!(a.model.forcing().len(), 1);
        let f = get("csi_fig1_f").unwrap().resolve().unwrap();
        assert_eq!(f.model.forcing().len(), 6);
        assert_eq!(f.domain.dims(), (401, 401));
        let c = get("csi_fig2c_desk").unwrap().resolve().unwrap();
        assert_eq!(c.domain.axes[0].hi, std::f64::consts::PI);
        let w = &c.model.forcing().frequencies;
        let th = crate::models::wrap_angle(2.0 * std::f64::consts::PI * 2.0 * w[0] / w[1]);
        assert!((c.domain.phases[0] - th).abs() < 1e-12);
        assert_eq!(c.domain.phases[1], 0.0);
        assert!(get("nope").is_err());
    }
}
