//! Piecewise-linear plots of concrete runs.

use std::fmt::Write;

use crate::automata::Automaton;
use crate::poly::Rational;
use crate::semantics::ConcreteRun;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotFormat {
    Csv,
    Svg,
}

/// Digits kept for non-terminating decimals in CSV output.
const CSV_PLACES: usize = 12;

/// Time and all variable values at each breakpoint: the state itself, the
/// end of its delay, then the next state. Consecutive identical rows are
/// merged, so an update that changes nothing leaves no trace.
pub fn breakpoints(a: &Automaton, run: &ConcreteRun) -> Vec<(Rational, Vec<Rational>)> {
    let mut rows: Vec<(Rational, Vec<Rational>)> = Vec::new();
    let mut push = |t: Rational, v: Vec<Rational>| {
        if rows.last().is_none_or(|(lt, lv)| *lt != t || *lv != v) {
            rows.push((t, v));
        }
    };
    let mut t = Rational::zero();
    for (k, s) in run.states.iter().enumerate() {
        push(t.clone(), s.valuation.clone());
        let Some(step) = run.steps.get(k) else { break };
        let flow = a.flow_map(s.location).unwrap_or_default();
        let moved = a
            .vars()
            .zip(&s.valuation)
            .map(|(d, x)| {
                flow.get(&d)
                    .map_or_else(|| x.clone(), |r| x + &(r * &step.duration))
            })
            .collect();
        t += &step.duration;
        push(t.clone(), moved);
    }
    rows
}

/// Breakpoints of one variable, consecutive duplicates merged.
pub fn polyline(a: &Automaton, run: &ConcreteRun, var: usize) -> Vec<(Rational, Rational)> {
    let mut out: Vec<(Rational, Rational)> = Vec::new();
    for (t, v) in breakpoints(a, run) {
        let p = (t, v[var].clone());
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    out
}

pub fn emit_plot(a: &Automaton, run: &ConcreteRun, format: PlotFormat) -> String {
    match format {
        PlotFormat::Csv => emit_csv(a, run),
        PlotFormat::Svg => emit_svg(a, run),
    }
}

fn emit_csv(a: &Automaton, run: &ConcreteRun) -> String {
    let mut out = String::from("t");
    for d in a.vars() {
        out.push(',');
        out.push_str(a.var_name(d));
    }
    out.push('\n');
    for (t, vals) in breakpoints(a, run) {
        out.push_str(&t.to_decimal_string(CSV_PLACES));
        for v in vals {
            out.push(',');
            out.push_str(&v.to_decimal_string(CSV_PLACES));
        }
        out.push('\n');
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const WIDTH: f64 = 640.0;
const PANEL: f64 = 120.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 40.0;
const GAP: f64 = 30.0;

/// One panel per variable on a shared time axis, with a dashed marker at
/// every discrete step.
fn emit_svg(a: &Automaton, run: &ConcreteRun) -> String {
    let vars: Vec<usize> = (0..a.var_kinds.len()).collect();
    let t_end = run.timestamps().last().map_or(0.0, Rational::to_f64);
    let span = if t_end > 0.0 { t_end } else { 1.0 };
    let plot_w = WIDTH - LEFT - 20.0;
    let height = TOP + vars.len() as f64 * (PANEL + GAP) + 20.0;
    let x_of = |t: f64| LEFT + t / span * plot_w;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.0}" viewBox="0 0 {WIDTH} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let bottom = height - 20.0;
    let stamps = run.timestamps();
    for (k, step) in run.steps.iter().enumerate() {
        let x = x_of(stamps[k + 1].to_f64());
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{bottom:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
            TOP - 12.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP - 16.0,
            escape(&a.edges[step.edge].action)
        );
    }
    for (i, &v) in vars.iter().enumerate() {
        let pts = polyline(a, run, v);
        let lo = pts
            .iter()
            .map(|(_, y)| y.to_f64())
            .fold(f64::INFINITY, f64::min);
        let hi = pts
            .iter()
            .map(|(_, y)| y.to_f64())
            .fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        };
        let y0 = TOP + i as f64 * (PANEL + GAP);
        let y_of = |y: f64| y0 + PANEL - (y - lo) / (hi - lo) * PANEL;
        let name = escape(a.var_name(a.vars().nth(v).expect("variable index")));
        let _ = writeln!(
            out,
            r#"<rect x="{LEFT}" y="{y0:.2}" width="{plot_w:.2}" height="{PANEL}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{name}</text>"#,
            LEFT - 8.0,
            y0 + PANEL / 2.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{hi}</text>"#,
            LEFT - 8.0,
            y0 + 10.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{lo}</text>"#,
            LEFT - 8.0,
            y0 + PANEL
        );
        let coords: Vec<String> = pts
            .iter()
            .map(|(t, y)| format!("{:.2},{:.2}", x_of(t.to_f64()), y_of(y.to_f64())))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">t = {t_end}</text>"#,
        WIDTH - 20.0,
        height - 4.0
    );
    out.push_str("</svg>\n");
    out
}
