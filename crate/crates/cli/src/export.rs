//! CSV tables and the SVG butterfly. The SVG is rendered from CSV text
//! only, so re-rendering a saved table reproduces the picture exactly.

use std::fmt::Write as _;

use mathieu_core::butterfly::ButterflyRow;
use mathieu_core::spectrum::BandStructure;
use serde::Deserialize;

use crate::format::number;

pub const BAND_COLUMNS: [&str; 9] = ["p", "q", "j", "lambda", "eta", "mu", "w", "w_prime", "ell"];
pub const GAP_COLUMNS: [&str; 6] = ["p", "q", "j", "left", "right", "delta"];
pub const BUTTERFLY_COLUMNS: [&str; 6] = ["p", "q", "band_index", "left", "right", "taxonomy"];

fn table<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV");
    for row in rows {
        w.write_record(&row).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}

pub fn bands_csv(bs: &BandStructure) -> String {
    table(
        &BAND_COLUMNS,
        bs.bands.iter().map(|b| {
            vec![
                bs.p.to_string(),
                bs.q.to_string(),
                b.j.to_string(),
                number(b.lambda),
                number(b.eta),
                number(b.mu),
                number(b.w),
                number(b.w_prime),
                number(b.ell),
            ]
        }),
    )
}

pub fn gaps_csv(bs: &BandStructure) -> String {
    table(
        &GAP_COLUMNS,
        bs.gaps.iter().map(|g| {
            vec![bs.p.to_string(), bs.q.to_string(), g.j.to_string(), number(g.left), number(g.right), number(g.delta)]
        }),
    )
}

fn taxonomy_label(taxonomy: bool) -> &'static str {
    if taxonomy {
        "signed"
    } else {
        "unsupported"
    }
}

pub fn butterfly_csv(rows: &[ButterflyRow]) -> String {
    table(
        &BUTTERFLY_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.p.to_string(),
                r.q.to_string(),
                r.band_index.to_string(),
                number(r.left),
                number(r.right),
                taxonomy_label(r.taxonomy).to_string(),
            ]
        }),
    )
}

#[derive(Debug, Clone, Deserialize)]
struct CsvRow {
    p: u64,
    q: u64,
    band_index: i64,
    left: f64,
    right: f64,
    taxonomy: String,
}

/// Reads a butterfly table back. Fails on a wrong header or a bad row.
pub fn parse_butterfly_csv(text: &str) -> Result<Vec<ButterflyRow>, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(str::to_owned).collect();
    if header != BUTTERFLY_COLUMNS {
        return Err(format!("unexpected butterfly header {header:?}"));
    }
    r.deserialize::<CsvRow>()
        .map(|row| {
            let row = row.map_err(|e| e.to_string())?;
            let taxonomy = match row.taxonomy.as_str() {
                "signed" => true,
                "unsupported" => false,
                other => return Err(format!("unknown taxonomy label {other:?}")),
            };
            Ok(ButterflyRow { p: row.p, q: row.q, band_index: row.band_index, left: row.left, right: row.right, taxonomy })
        })
        .collect()
}

const WIDTH: f64 = 1200.0;
const HEIGHT: f64 = 900.0;
const MARGIN: f64 = 40.0;

/// Energy on the horizontal axis over `[-4, 4]`, frequency `p/q` on the
/// vertical axis over `[0, 1]`, one horizontal stroke per band.
pub fn render_svg(csv_text: &str) -> Result<String, String> {
    let rows = parse_butterfly_csv(csv_text)?;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x = |e: f64| MARGIN + (e.clamp(-4.0, 4.0) + 4.0) / 8.0 * plot_w;
    let y = |p: u64, q: u64| MARGIN + (1.0 - p as f64 / q as f64) * plot_h;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#999" stroke-width="0.5"/>"##
    );
    for (label, e) in [("-4", -4.0), ("0", 0.0), ("4", 4.0)] {
        let _ = writeln!(svg, r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="middle">{label}</text>"#, x(e), HEIGHT - 15.0);
    }
    let _ = writeln!(svg, r#"<g stroke-width="1.2" stroke-linecap="square">"#);
    for r in &rows {
        let colour = if r.taxonomy { "#000000" } else { "#1f5fa8" };
        let yy = y(r.p, r.q);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.3}" y1="{yy:.3}" x2="{:.3}" y2="{yy:.3}" stroke="{colour}"/>"#,
            x(r.left),
            x(r.right)
        );
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mathieu_core::butterfly::butterfly_rows;
    use mathieu_core::spectrum::extract;

    #[test]
    fn band_and_gap_tables_have_fixed_headers() {
        let bs = extract(2, 3).unwrap();
        let bands = bands_csv(&bs);
        let gaps = gaps_csv(&bs);
        assert_eq!(bands.lines().next().unwrap(), "p,q,j,lambda,eta,mu,w,w_prime,ell");
        assert_eq!(gaps.lines().next().unwrap(), "p,q,j,left,right,delta");
        assert_eq!(bands.lines().count(), 4);
        assert_eq!(gaps.lines().count(), 3);
    }

    #[test]
    fn butterfly_table_round_trips() {
        let rows = butterfly_rows(6).unwrap();
        let text = butterfly_csv(&rows);
        assert_eq!(parse_butterfly_csv(&text).unwrap(), rows);
    }

    #[test]
    fn svg_is_a_function_of_the_table() {
        let text = butterfly_csv(&butterfly_rows(5).unwrap());
        let a = render_svg(&text).unwrap();
        assert_eq!(a, render_svg(&text).unwrap());
        assert_eq!(a.matches("<line").count(), text.lines().count() - 1);
    }

    #[test]
    fn rejects_foreign_tables() {
        assert!(parse_butterfly_csv("a,b\n1,2\n").is_err());
        let bad = "p,q,band_index,left,right,taxonomy\n1,2,0,0,1,maybe\n";
        assert!(parse_butterfly_csv(bad).is_err());
    }
}
