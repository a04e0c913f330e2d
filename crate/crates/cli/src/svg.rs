//! Deterministic SVG renderers: pitch heatmaps and z-score matrices.
//!
//! Output is a pure function of the input structures; identical inputs
//! give byte-identical SVG.

use epv_core::error::{Error, Result};
use epv_core::io::ModelFile;
use epv_core::ZScoreProfile;

/// Pixels per metre.
const SCALE: f64 = 6.0;
const MARGIN: f64 = 10.0;
const PITCH_W: f64 = 68.0;
const Y_MIN: f64 = -10.0;
const Y_MAX: f64 = 110.0;

/// Sequential colour ramp (viridis stops, dark = low).
const RAMP: [(u8, u8, u8); 9] = [
    (68, 1, 84),
    (72, 40, 120),
    (62, 74, 137),
    (49, 104, 142),
    (38, 130, 142),
    (31, 158, 137),
    (53, 183, 121),
    (109, 205, 89),
    (253, 231, 37),
];

const NO_DATA_FILL: &str = "#d9d9d9";

fn lerp(a: u8, b: u8, t: f64) -> u8 {
    (f64::from(a) + (f64::from(b) - f64::from(a)) * t).round() as u8
}

fn ramp_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let scaled = t * (RAMP.len() - 1) as f64;
    let idx = (scaled.floor() as usize).min(RAMP.len() - 2);
    let frac = scaled - idx as f64;
    let (r0, g0, b0) = RAMP[idx];
    let (r1, g1, b1) = RAMP[idx + 1];
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(r0, r1, frac),
        lerp(g0, g1, frac),
        lerp(b0, b1, frac)
    )
}

/// Diverging blue-white-red ramp for standardised values.
fn diverging_color(z: f64, limit: f64) -> String {
    let t = (z / limit).clamp(-1.0, 1.0);
    let (r, g, b) = if t < 0.0 {
        let u = -t;
        (lerp(255, 33, u), lerp(255, 102, u), lerp(255, 172, u))
    } else {
        (lerp(255, 178, t), lerp(255, 24, t), lerp(255, 43, t))
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn px(x: f64) -> f64 {
    x * SCALE + MARGIN
}

/// Pitch y (attacking toward 100) to SVG y (grows downward).
fn py(y: f64) -> f64 {
    (Y_MAX - y) * SCALE + MARGIN
}

/// Renders one rectangle per zone, coloured on a sequential scale over
/// the model's value range, with the try line, 20m line and 50m line.
pub fn render_heatmap(model: &ModelFile) -> Result<String> {
    if model.zones.iter().any(|z| z.bounds.is_empty()) {
        return Err(Error::MissingGeometry);
    }
    let values: Vec<f64> = model.zones.iter().filter_map(|z| z.epv).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fill_of = |value: Option<f64>| -> String {
        match value {
            None => NO_DATA_FILL.to_string(),
            Some(v) if max > min => ramp_color((v - min) / (max - min)),
            Some(_) => ramp_color(0.5),
        }
    };

    let width = PITCH_W * SCALE + 2.0 * MARGIN;
    let height = (Y_MAX - Y_MIN) * SCALE + 2.0 * MARGIN;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         width=\"{width}\" height=\"{height}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));

    for zone in &model.zones {
        let fill = fill_of(zone.epv);
        for rect in &zone.bounds {
            svg.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" \
                 stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n",
                px(rect.x0),
                py(rect.y1),
                (rect.x1 - rect.x0) * SCALE,
                (rect.y1 - rect.y0) * SCALE,
                fill,
            ));
        }
    }

    // Pitch outline and the try / 20m / 50m lines.
    svg.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#000000\" stroke-width=\"1.5\"/>\n",
        px(0.0),
        py(Y_MAX),
        PITCH_W * SCALE,
        (Y_MAX - Y_MIN) * SCALE,
    ));
    for line_y in [100.0, 80.0, 50.0] {
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\" \
             stroke-width=\"1.5\"/>\n",
            px(0.0),
            py(line_y),
            px(PITCH_W),
            py(line_y),
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders a team-by-zone matrix of z-scores on a diverging scale
/// clamped at |z| = 2.5 (the +-1 / +-2 dependence bands sit inside it).
pub fn render_zscore(profile: &ZScoreProfile) -> String {
    const CELL_W: f64 = 26.0;
    const CELL_H: f64 = 22.0;
    const LEFT: f64 = 60.0;
    const TOP: f64 = 30.0;

    let n_zones = profile.z.len();
    let n_teams = profile.teams.len();
    let width = LEFT + n_zones as f64 * CELL_W + MARGIN;
    let height = TOP + n_teams as f64 * CELL_H + MARGIN;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         width=\"{width}\" height=\"{height}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));

    for zone in 0..n_zones {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"middle\">{}</text>\n",
            LEFT + (zone as f64 + 0.5) * CELL_W,
            TOP - 8.0,
            zone + 1,
        ));
    }
    for (team_idx, team) in profile.teams.iter().enumerate() {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"end\">{}</text>\n",
            LEFT - 6.0,
            TOP + (team_idx as f64 + 0.65) * CELL_H,
            team,
        ));
        for zone in 0..n_zones {
            let z = profile.z[zone][team_idx];
            svg.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{CELL_W}\" height=\"{CELL_H}\" fill=\"{}\" \
                 stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n",
                LEFT + zone as f64 * CELL_W,
                TOP + team_idx as f64 * CELL_H,
                diverging_color(z, 2.5),
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use epv_core::geometry::Rect;
    use epv_core::io::{SystemInfo, ZoneEntry};

    fn model(values: Vec<Option<f64>>) -> ModelFile {
        ModelFile {
            system: SystemInfo {
                kind: "grid".into(),
                cell_m: Some(10),
                zone_count: values.len(),
            },
            gamma: 1.0,
            zones: values
                .into_iter()
                .enumerate()
                .map(|(i, epv)| ZoneEntry {
                    id: i as u32 + 1,
                    bounds: vec![Rect {
                        x0: 0.0,
                        y0: i as f64 * 10.0 - 10.0,
                        x1: 68.0,
                        y1: i as f64 * 10.0,
                    }],
                    epv,
                    visits: 1,
                })
                .collect(),
        }
    }

    #[test]
    fn constant_model_uses_one_fill() {
        let svg = render_heatmap(&model(vec![Some(2.0), Some(2.0), Some(2.0)])).unwrap();
        let mid = ramp_color(0.5);
        assert_eq!(svg.matches(&mid).count(), 3);
    }

    #[test]
    fn extremes_hit_scale_endpoints() {
        let svg = render_heatmap(&model(vec![Some(0.0), Some(6.0)])).unwrap();
        assert!(svg.contains(&ramp_color(0.0)));
        assert!(svg.contains(&ramp_color(1.0)));
    }

    #[test]
    fn missing_value_uses_no_data_fill() {
        let svg = render_heatmap(&model(vec![Some(1.0), None, Some(2.0)])).unwrap();
        assert!(svg.contains(NO_DATA_FILL));
    }

    #[test]
    fn empty_bounds_is_missing_geometry() {
        let mut m = model(vec![Some(1.0)]);
        m.zones[0].bounds.clear();
        assert!(matches!(render_heatmap(&m), Err(Error::MissingGeometry)));
    }

    #[test]
    fn rendering_is_deterministic() {
        let m = model(vec![Some(0.5), Some(1.5), None, Some(4.0)]);
        assert_eq!(render_heatmap(&m).unwrap(), render_heatmap(&m).unwrap());
    }

    #[test]
    fn zscore_matrix_has_one_cell_per_team_zone() {
        let profile = ZScoreProfile {
            teams: vec!["T01".into(), "T02".into()],
            z: vec![vec![1.0, -1.0], vec![0.0, 0.0], vec![2.5, -2.5]],
            zero_spread: vec![false, true, false],
        };
        let svg = render_zscore(&profile);
        assert_eq!(svg.matches("<rect").count(), 1 + 6); // background + cells
        assert_eq!(render_zscore(&profile), svg);
    }
}
