use std::collections::BTreeMap;

use biasqec::noise::special_point;
use biasqec::statmech::special_point_failure_rates;
use biasqec::{CodeFamily, Dataset, FailureMode};
use plotters::prelude::*;

use crate::manifest::Manifest;
use crate::{CliError, CliResult, PlotArgs};

/// `(p, rate, standard error)` per distance.
type Curves = BTreeMap<usize, Vec<(f64, f64, f64)>>;

fn exact_value(family: CodeFamily, d: usize, eta: biasqec::Bias, mode: FailureMode) -> Option<f64> {
    let r = special_point_failure_rates(family, d, eta).ok()?;
    Some(match mode {
        FailureMode::X => r.p_fx,
        FailureMode::Z => r.p_fz,
        FailureMode::Y => r.p_fy,
        FailureMode::Total => r.p_f,
    })
}

pub fn plot(a: &PlotArgs) -> CliResult<()> {
    let data = Dataset::load(&a.input).map_err(|e| CliError::new("io", format!("{}: {e}", a.input.display())))?;
    let rows: Vec<_> = data
        .rows
        .iter()
        .filter(|r| a.family.is_none_or(|f| f == r.family))
        .filter(|r| a.eta.is_none_or(|e| e == r.eta))
        .collect();
    let Some(first) = rows.first() else {
        return Err(CliError::new("empty", "no rows left to plot"));
    };
    let (family, eta) = (first.family, first.eta);
    if rows.iter().any(|r| r.family != family || r.eta != eta) {
        return Err(CliError::new("usage", "the CSV mixes families or biases; select one with --family/--eta"));
    }
    Manifest::new("plot", a).write_next_to(&a.out)?;

    let mut curves = Curves::new();
    for r in &rows {
        let (v, se) = r.rates.mode(a.mode);
        curves.entry(r.d).or_default().push((r.p, v, se));
    }
    for c in curves.values_mut() {
        c.sort_by(|x, y| x.0.total_cmp(&y.0));
    }
    let p_lo = rows.iter().map(|r| r.p).fold(f64::INFINITY, f64::min);
    let p_hi = rows.iter().map(|r| r.p).fold(f64::NEG_INFINITY, f64::max);
    let pad = ((p_hi - p_lo) * 0.05).max(1e-3);
    let p_s = special_point(eta).ok().filter(|p| (p_lo - 1e-12..=p_hi + 1e-12).contains(p));
    let overlay: Vec<(usize, f64)> = match p_s {
        Some(_) => curves.keys().filter_map(|&d| exact_value(family, d, eta, a.mode).map(|v| (d, v))).collect(),
        None => Vec::new(),
    };
    let y_hi = rows
        .iter()
        .map(|r| r.rates.mode(a.mode).0 + r.rates.mode(a.mode).1)
        .chain(overlay.iter().map(|o| o.1))
        .fold(0.0f64, f64::max)
        .max(1e-3)
        * 1.05;

    let draw = || -> Result<(), Box<dyn std::error::Error>> {
        let root = SVGBackend::new(&a.out, (800, 560)).into_drawing_area();
        root.fill(&WHITE)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(format!("{family}, eta = {eta}: {}", a.mode), ("sans-serif", 22))
            .margin(16)
            .x_label_area_size(44)
            .y_label_area_size(64)
            .build_cartesian_2d((p_lo - pad)..(p_hi + pad), 0.0..y_hi)?;
        chart.configure_mesh().x_desc("p").y_desc(a.mode.to_string()).draw()?;
        for (i, (d, pts)) in curves.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            chart
                .draw_series(LineSeries::new(pts.iter().map(|&(p, v, _)| (p, v)), color.stroke_width(2)))?
                .label(format!("d = {d}"))
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
            chart.draw_series(pts.iter().map(|&(p, v, se)| {
                PathElement::new(vec![(p, (v - se).max(0.0)), (p, v + se)], color.stroke_width(1))
            }))?;
            chart.draw_series(pts.iter().map(|&(p, v, _)| Circle::new((p, v), 3, color.filled())))?;
        }
        if let Some(p_s) = p_s {
            chart
                .draw_series(overlay.iter().map(|&(_, v)| Cross::new((p_s, v), 6, BLACK.stroke_width(2))))?
                .label("exact at p_s")
                .legend(|(x, y)| Cross::new((x + 9, y), 5, BLACK.stroke_width(2)));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()?;
        root.present()?;
        Ok(())
    };
    draw().map_err(|e| CliError::new("plot", e.to_string()))?;
    eprintln!("{} written", a.out.display());
    Ok(())
}
