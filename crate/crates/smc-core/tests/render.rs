use smc_core::render::GLYPH_TABLE;
use smc_core::*;

fn ascii(text: &str) -> String {
    render_diagram(&d(text), &RenderOptions::new(Format::Ascii))
}

#[test]
fn identity_is_bars_only() {
    let out = ascii("id2");
    assert_eq!(out.lines().count(), 1);
    assert_eq!(out.split_whitespace().collect::<Vec<_>>(), ["|", "|"]);
}

#[test]
fn two_products_give_two_rows_at_offset_zero() {
    let out = ascii("(m*id1);m");
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    let glyph = Glyphs::default().ascii(Gate::M).to_string();
    for row in rows {
        assert_eq!(row.split_whitespace().next(), Some(glyph.as_str()));
    }
}

#[test]
fn closed_diagram_header() {
    assert_eq!(ascii("e").lines().next(), Some("."));
}

#[test]
fn ascii_round_trip_small_diagrams() {
    let o = RenderOptions::new(Format::Ascii);
    let all = enumerate_diagrams(2, 2, 4);
    assert!(!all.is_empty());
    for phi in all {
        let text = render_diagram(&phi, &o);
        let back = read_ascii(&text, &o.glyphs).unwrap();
        assert_eq!(back, phi, "{text}");
        assert_eq!(parse_diagram(&print_diagram(&back)).unwrap(), phi);
    }
}

#[test]
fn rendering_is_deterministic() {
    let phi = d("(id1*s);(s*id1);(m*id1);m");
    for f in [Format::Ascii, Format::Tikz] {
        let o = RenderOptions::new(f);
        assert_eq!(render_diagram(&phi, &o), render_diagram(&phi, &o));
    }
}

#[test]
fn tikz_is_a_standalone_document() {
    let out = render_diagram(&d("(e*id1);m"), &RenderOptions::new(Format::Tikz));
    assert!(out.starts_with("\\documentclass[tikz]{standalone}"));
    assert!(out.contains("\\begin{tikzpicture}"));
    assert!(out.trim_end().ends_with("\\end{document}"));
    let glyphs = Glyphs::default();
    assert_eq!(out.matches(&format!("{}{{", glyphs.tikz(Gate::M))).count(), 1);
    assert_eq!(out.matches(&format!("{}{{", glyphs.tikz(Gate::E))).count(), 1);
}

#[test]
fn glyph_table_is_shipped() {
    let g = Glyphs::parse(GLYPH_TABLE).unwrap();
    assert_eq!(g, Glyphs::default());
    assert!(Glyphs::parse("m \\_/ \\x").is_none());
}
