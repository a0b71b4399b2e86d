//! Text, CSV and SVG renderings. All output is a pure function of the input.

use std::fmt::Write as _;

use itrisk::budget::BudgetReport;
use itrisk::RiskProfile;

use crate::report::KpiRow;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Step plot of each profile with a dashed line at its average risk.
/// Sample `t` is drawn over `[t-1, t]`, so the area under each polyline is
/// the profile's total risk.
pub fn render_profile_svg(profiles: &[(String, RiskProfile<f64>)]) -> String {
    let ticks = profiles
        .iter()
        .map(|(_, p)| p.len())
        .max()
        .unwrap_or(0)
        .max(1);
    let peak = profiles
        .iter()
        .flat_map(|(_, p)| p.values())
        .fold(0.0f64, f64::max);
    let ymax = peak.ceil().max(1.0);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let x = |t: f64| LEFT + pw * t / ticks as f64;
    let y = |v: f64| TOP + ph * (1.0 - v / ymax);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        s,
        r##"<g stroke="#000000" stroke-width="1"><line x1="{l:.2}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}"/><line x1="{l:.2}" y1="{t:.2}" x2="{l:.2}" y2="{b:.2}"/></g>"##,
        l = LEFT,
        r = WIDTH - RIGHT,
        t = TOP,
        b = TOP + ph,
    );

    let _ = writeln!(s, r#"<g text-anchor="middle">"#);
    let xstep = (ticks as f64 / 20.0).ceil().max(1.0) as usize;
    for t in (0..=ticks).step_by(xstep) {
        let xt = x(t as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{xt:.2}" y1="{b:.2}" x2="{xt:.2}" y2="{b5:.2}" stroke="#000000"/><text x="{xt:.2}" y="{ty:.2}">{t}</text>"##,
            b = TOP + ph,
            b5 = TOP + ph + 5.0,
            ty = TOP + ph + 18.0,
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}">time (ticks)</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g text-anchor="end">"#);
    let ystep = (ymax / 10.0).ceil().max(1.0);
    let mut v = 0.0;
    while v <= ymax {
        let yv = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{l5:.2}" y1="{yv:.2}" x2="{l:.2}" y2="{yv:.2}" stroke="#000000"/><text x="{tx:.2}" y="{ty:.2}">{v}</text>"##,
            l = LEFT,
            l5 = LEFT - 5.0,
            tx = LEFT - 8.0,
            ty = yv + 4.0,
        );
        v += ystep;
    }
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">risk</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    let _ = writeln!(s, "</g>");

    for (i, (label, p)) in profiles.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let values = p.values();
        let mut pts = Vec::with_capacity(values.len() * 2);
        for (t, v) in values.iter().enumerate() {
            pts.push(format!("{:.2},{:.2}", x(t as f64), y(*v)));
            pts.push(format!("{:.2},{:.2}", x(t as f64 + 1.0), y(*v)));
        }
        if pts.is_empty() {
            pts.push(format!("{:.2},{:.2}", x(0.0), y(0.0)));
        }
        let _ = writeln!(
            s,
            r#"<polyline class="profile" data-label="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            escape(label),
            pts.join(" ")
        );
        let avg = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        let ya = y(avg);
        let _ = writeln!(
            s,
            r#"<line class="average" data-label="{}" data-value="{avg:.6}" x1="{:.2}" y1="{ya:.2}" x2="{:.2}" y2="{ya:.2}" stroke="{color}" stroke-width="1" stroke-dasharray="6 4"/>"#,
            escape(label),
            x(0.0),
            x(values.len() as f64),
        );
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" fill="{color}" text-anchor="end">{} (R_AD {avg:.3})</text>"#,
            WIDTH - RIGHT - 4.0,
            escape(label),
        );
    }
    s.push_str("</svg>\n");
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `tick,<label>...`; a profile shorter than the longest leaves its cells empty.
pub fn profiles_csv(profiles: &[(String, RiskProfile<f64>)]) -> String {
    let mut s = String::from("tick");
    for (label, _) in profiles {
        s.push(',');
        s.push_str(&csv_field(label));
    }
    s.push('\n');
    let ticks = profiles.iter().map(|(_, p)| p.len()).max().unwrap_or(0);
    for t in 0..ticks {
        let _ = write!(s, "{}", t + 1);
        for (_, p) in profiles {
            s.push(',');
            if let Some((_, v)) = p.samples.get(t) {
                let _ = write!(s, "{v:.6}");
            }
        }
        s.push('\n');
    }
    s
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let mut out = String::new();
        for (i, (c, w)) in cells.iter().zip(&width).enumerate() {
            if i == 0 {
                let _ = write!(out, "{c:<w$}");
            } else {
                let _ = write!(out, "  {c:>w$}");
            }
        }
        out.trim_end().to_string() + "\n"
    };
    let mut s = line(header.iter().map(|h| h.to_string()).collect());
    for r in rows {
        s.push_str(&line(r.clone()));
    }
    s
}

/// One row per plan, three decimals for readability.
pub fn kpi_table(rows: &[KpiRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.phi.to_string(),
                format!("{:.3}", r.cost),
                format!("{:.3}", r.remaining_risk),
                format!("{:.3}", r.total_risk_area),
                format!("{:.3}", r.average_risk),
                format!("{:.3}", r.max_risk),
            ]
        })
        .collect();
    table(&["plan", "phi", "cost", "R_R", "R_T", "R_AD", "max"], &body)
}

/// Engineering notation with an SI prefix on seconds.
pub fn seconds(x: f64) -> String {
    let (scale, unit) = match x.abs() {
        0.0 => (1.0, "s"),
        v if v >= 1.0 => (1.0, "s"),
        v if v >= 1e-3 => (1e3, "ms"),
        v if v >= 1e-6 => (1e6, "us"),
        v if v >= 1e-9 => (1e9, "ns"),
        _ => (1e12, "ps"),
    };
    format!("{:.4} {unit}", x * scale)
}

pub fn budget_table(r: &BudgetReport<f64>) -> String {
    let body: Vec<Vec<String>> = r
        .stages
        .iter()
        .map(|s| {
            vec![
                s.name.clone(),
                s.kind.name().to_string(),
                s.channels.to_string(),
                s.units.to_string(),
                s.op_count.to_string(),
                seconds(s.per_unit_deadline),
                seconds(s.time_per_op),
                seconds(s.scaled_stage_time),
                s.allocated_processors.to_string(),
                if s.feasible { "yes" } else { "NO" }.to_string(),
            ]
        })
        .collect();
    let mut out = table(
        &[
            "stage",
            "kind",
            "channels",
            "units",
            "ops",
            "deadline/unit",
            "budget/op",
            "work/unit",
            "procs",
            "feasible",
        ],
        &body,
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "benchmark       {}", r.benchmark);
    let _ = writeln!(out, "processors      {}", r.total_processors);
    let _ = writeln!(out, "boards          {}", r.boards);
    let _ = writeln!(
        out,
        "acquisition     {} bits ({:.3} MiB)",
        r.acquisition_memory_bits,
        itrisk::budget::bits_to_mib::<f64>(r.acquisition_memory_bits)
    );
    let _ = writeln!(
        out,
        "buffers         {} bits ({:.3} KiB)",
        r.buffer_bits,
        itrisk::budget::bits_to_kib::<f64>(r.buffer_bits)
    );
    let _ = writeln!(out, "io utilization  {:.6}", r.io_utilization);
    let _ = writeln!(
        out,
        "feasible        {}",
        if r.feasible { "yes" } else { "NO" }
    );
    out
}
