use std::collections::BTreeMap;
use std::fmt::Write;

use super::DiagramDocument;
use crate::forbidden_regions::{Orientation, Staircase};
use crate::pairing_relations::{PairClass, RelationKind};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Birth-death scatter: diagonal, off-diagonal pairs colored by dimension,
/// essential pairs on the top edge, relation arrows labelled by kind and
/// forbidden regions shaded when present.
pub(super) fn render(doc: &DiagramDocument) -> String {
    let values = doc
        .pairs
        .iter()
        .flat_map(|p| [Some(p.birth_value), p.death_value])
        .flatten();
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| {
        (a.min(t), b.max(t))
    });
    let (lo, hi) = if lo.is_finite() {
        (lo, if hi > lo { hi } else { lo + 1.0 })
    } else {
        (0.0, 1.0)
    };
    let span = SIZE - 2.0 * MARGIN;
    let sx = |t: f64| MARGIN + (t - lo) / (hi - lo) * span;
    let sy = |t: f64| SIZE - MARGIN - (t - lo) / (hi - lo) * span;
    let clamp = |t: f64| t.clamp(lo, hi);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(
        s,
        r##"<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="6" markerHeight="6" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#555"/></marker></defs>"##
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#
    );

    if let Some(regions) = &doc.regions {
        for r in regions.values() {
            for (st, fill) in [(&r.death, "#d62728"), (&r.birth, "#1f77b4")] {
                shade(&mut s, st, fill, lo, hi, &sx, &sy, &clamp);
            }
        }
    }

    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#888" stroke-dasharray="4 3"/>"##,
        sx(lo),
        sy(lo),
        sx(hi),
        sy(hi)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{span}" height="{span}" fill="none" stroke="#333"/>"##
    );

    let mut at: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for p in &doc.pairs {
        if let (PairClass::OffDiagonal, Some(d)) = (p.class, p.death_value) {
            at.insert(p.birth.as_str(), (sx(p.birth_value), sy(d)));
        }
    }
    for r in &doc.relations {
        if let (Some(&(x1, y1)), Some(&(x2, y2))) = (at.get(r.from.as_str()), at.get(r.to.as_str()))
        {
            let (color, label) = match r.kind {
                RelationKind::Hom => ("#555", "hom"),
                RelationKind::Cohom => ("#999", "cohom"),
            };
            let _ = writeln!(
                s,
                r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{color}" marker-end="url(#arrow)"><title>{label}</title></line>"#
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="8" fill="{color}">{label}</text>"#,
                (x1 + x2) / 2.0,
                (y1 + y2) / 2.0
            );
        }
    }
    for p in &doc.pairs {
        let color = COLORS[p.dim % COLORS.len()];
        match (p.class, p.death_value) {
            (PairClass::OffDiagonal, Some(d)) => {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"><title>{} {}</title></circle>"#,
                    sx(p.birth_value),
                    sy(d),
                    p.birth,
                    p.death.as_deref().unwrap_or("")
                );
            }
            (PairClass::Essential, _) => {
                let _ = writeln!(
                    s,
                    r#"<path d="M{:.2},{:.2} l-3,6 l6,0 z" fill="{color}"><title>{}</title></path>"#,
                    sx(p.birth_value),
                    MARGIN - 8.0,
                    p.birth
                );
            }
            _ => {}
        }
    }
    s.push_str("</svg>\n");
    s
}

#[allow(clippy::too_many_arguments)]
fn shade(
    s: &mut String,
    st: &Staircase,
    fill: &str,
    lo: f64,
    hi: f64,
    sx: &impl Fn(f64) -> f64,
    sy: &impl Fn(f64) -> f64,
    clamp: &impl Fn(f64) -> f64,
) {
    for c in &st.corners {
        let (x0, x1, y0, y1) = match st.orientation {
            Orientation::LowerLeft => (lo, clamp(c.x), lo, clamp(c.y)),
            Orientation::UpperRight => (clamp(c.x), hi, clamp(c.y), hi),
        };
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}" fill-opacity="0.08"/>"#,
            sx(x0),
            sy(y1),
            sx(x1) - sx(x0),
            sy(y0) - sy(y1)
        );
    }
}
