//! SVG figures drawn from CSV text, so a figure can always be regenerated
//! from the table it shows.

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    Line,
    Points,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Series {
    pub column: String,
    pub mark: Mark,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    pub series: Vec<Series>,
    /// Keep only rows whose `column` equals `value` as text.
    pub filter: Option<(String, String)>,
    #[serde(default)]
    pub log_x: bool,
    #[serde(default)]
    pub log_y: bool,
}

impl PlotSpec {
    pub fn new(title: &str, x: &str) -> Self {
        Self { title: title.into(), x: x.into(), series: Vec::new(), filter: None, log_x: false, log_y: false }
    }

    pub fn line(mut self, col: &str) -> Self {
        self.series.push(Series { column: col.into(), mark: Mark::Line });
        self
    }

    pub fn points(mut self, col: &str) -> Self {
        self.series.push(Series { column: col.into(), mark: Mark::Points });
        self
    }

    pub fn only(mut self, col: &str, value: &str) -> Self {
        self.filter = Some((col.into(), value.into()));
        self
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }
}

fn table(csv_text: &str, spec: &PlotSpec) -> Result<(Vec<f64>, Vec<Vec<f64>>), String> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv_text.as_bytes());
    let header = rd.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| format!("no column '{name}' in CSV"));
    let xi = col(&spec.x)?;
    let yis = spec.series.iter().map(|s| col(&s.column)).collect::<Result<Vec<_>, _>>()?;
    let fi = match &spec.filter {
        Some((c, v)) => Some((col(c)?, v.clone())),
        None => None,
    };
    let mut xs = Vec::new();
    let mut ys = vec![Vec::new(); yis.len()];
    for rec in rd.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        if let Some((i, v)) = &fi {
            if &rec[*i] != v {
                continue;
            }
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| format!("non-numeric cell '{}'", &rec[i]));
        xs.push(num(xi)?);
        for (k, &i) in yis.iter().enumerate() {
            ys[k].push(num(i)?);
        }
    }
    if xs.is_empty() {
        return Err("no rows to plot".into());
    }
    Ok((xs, ys))
}

fn range(v: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite() && (!log || *x > 0.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (if log { 1e-3 } else { 0.0 }, 1.0);
    }
    if log {
        return (lo / 2.0, hi * 2.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

const PALETTE: [RGBColor; 4] = [RGBColor(31, 119, 180), RGBColor(214, 39, 40), RGBColor(44, 160, 44), RGBColor(148, 103, 189)];

/// Renders `spec` from the CSV text.
pub fn render_svg(csv_text: &str, spec: &PlotSpec) -> Result<String, String> {
    let (xs, ys) = table(csv_text, spec)?;
    let xr = range(xs.iter().copied(), spec.log_x);
    let yr = range(ys.iter().flatten().copied(), spec.log_y);
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, (720, 450)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| e.to_string())?;
        let mut b = ChartBuilder::on(&root);
        b.caption(&spec.title, ("sans-serif", 18)).margin(12).x_label_area_size(36).y_label_area_size(56);
        macro_rules! draw {
            ($chart:expr) => {{
                let mut chart = $chart.map_err(|e| e.to_string())?;
                chart.configure_mesh().x_desc(spec.x.as_str()).draw().map_err(|e| e.to_string())?;
                for (k, s) in spec.series.iter().enumerate() {
                    let color = PALETTE[k % PALETTE.len()];
                    let pts: Vec<(f64, f64)> = xs
                        .iter()
                        .zip(&ys[k])
                        .filter(|(x, y)| (!spec.log_x || **x > 0.0) && (!spec.log_y || **y > 0.0))
                        .map(|(&x, &y)| (x, y))
                        .collect();
                    let anno = match s.mark {
                        Mark::Line => chart.draw_series(LineSeries::new(pts, color.stroke_width(2))),
                        Mark::Points => chart.draw_series(pts.into_iter().map(|p| Circle::new(p, 3, color.filled()))),
                    }
                    .map_err(|e| e.to_string())?;
                    anno.label(s.column.as_str())
                        .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
                }
                chart
                    .configure_series_labels()
                    .background_style(WHITE.mix(0.8))
                    .border_style(BLACK)
                    .draw()
                    .map_err(|e| e.to_string())?;
            }};
        }
        match (spec.log_x, spec.log_y) {
            (false, false) => draw!(b.build_cartesian_2d(xr.0..xr.1, yr.0..yr.1)),
            (true, false) => draw!(b.build_cartesian_2d((xr.0..xr.1).log_scale(), yr.0..yr.1)),
            (false, true) => draw!(b.build_cartesian_2d(xr.0..xr.1, (yr.0..yr.1).log_scale())),
            (true, true) => draw!(b.build_cartesian_2d((xr.0..xr.1).log_scale(), (yr.0..yr.1).log_scale())),
        }
        root.present().map_err(|e| e.to_string())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "# meta\nx,y,z,g\n0,1,2,a\n1,2,3,b\n2,0.5,1,a\n";

    #[test]
    fn renders_and_is_deterministic() {
        let spec = PlotSpec::new("t", "x").line("y").points("z");
        let a = render_svg(CSV, &spec).unwrap();
        assert!(a.starts_with("<svg"));
        assert_eq!(a, render_svg(CSV, &spec).unwrap());
    }

    #[test]
    fn filter_and_missing_column() {
        let spec = PlotSpec::new("t", "x").line("y").only("g", "a");
        let (xs, _) = table(CSV, &spec).unwrap();
        assert_eq!(xs, vec![0.0, 2.0]);
        assert!(render_svg(CSV, &PlotSpec::new("t", "x").line("nope")).is_err());
    }

    #[test]
    fn log_axes() {
        let spec = PlotSpec::new("t", "x").line("y").log_log();
        assert!(render_svg(CSV, &spec).is_ok());
    }
}
