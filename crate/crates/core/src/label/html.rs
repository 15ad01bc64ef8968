//! Self-contained HTML view of a label. Markup is kept XML well-formed and
//! every figure is wrapped in a `<data>` element carrying the JSON text of
//! the value it shows.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use super::{fmt_number, NutritionalLabel};
use crate::dataset::ColumnStats;
use crate::fairness::{Details, Direction, FairnessResult};

const STYLE: &str = "
body { font-family: Helvetica, Arial, sans-serif; margin: 2em; color: #222; }
.label { max-width: 60em; border: 3px solid #222; padding: 1em; }
.widget { border-top: 2px solid #222; padding: 0.5em 0; }
.widget h2 { margin: 0.2em 0; font-size: 1.2em; }
table { border-collapse: collapse; margin: 0.4em 0; }
th, td { border-bottom: 1px solid #ccc; padding: 0.15em 0.6em; text-align: left; }
.badge { padding: 0 0.4em; border-radius: 0.3em; font-size: 0.85em; }
[data-verdict='fair'] .badge, .badge.fair, .badge.stable { background: #cfe8cf; }
.badge.unfair, .badge.unstable { background: #f3c7c7; }
.bar { display: inline-block; height: 0.8em; background: #6b8fb5; }
summary { cursor: pointer; color: #335; }
footer { font-size: 0.8em; color: #555; }
";

fn esc(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn num<T: Serialize>(value: T) -> String {
    let text = fmt_number(value);
    format!("<data value=\"{text}\">{text}</data>")
}

fn stats_cells(stats: Option<&ColumnStats>) -> String {
    match stats {
        Some(s) => format!(
            "<td>{}</td><td>{}</td><td>{}</td>",
            num(s.minimum),
            num(s.median),
            num(s.maximum)
        ),
        None => "<td>-</td><td>-</td><td>-</td>".to_string(),
    }
}

fn open_widget(out: &mut String, id: &str, title: &str, verdict: Option<&str>) {
    let verdict = verdict
        .map(|v| format!(" data-verdict=\"{v}\""))
        .unwrap_or_default();
    let _ = write!(
        out,
        "<section class=\"widget\" id=\"{id}\" data-widget=\"{id}\"{verdict}>\n<h2>{}</h2>\n",
        esc(title)
    );
}

fn recipe(out: &mut String, label: &NutritionalLabel) {
    open_widget(out, "recipe", "Recipe", None);
    out.push_str("<div class=\"overview\"><table><tr><th>Attribute</th><th>Weight</th><th>Share</th></tr>\n");
    for e in &label.recipe.entries {
        let _ = writeln!(
            out,
            "<tr><td>{}</td><td>{}</td><td>{}</td></tr>",
            esc(&e.attribute),
            num(e.weight),
            num(e.share)
        );
    }
    out.push_str("</table></div>\n<details><summary>Top-k and overall statistics</summary>\n");
    out.push_str("<table><tr><th>Attribute</th><th>Scope</th><th>Min</th><th>Median</th><th>Max</th></tr>\n");
    for e in &label.recipe.entries {
        for (scope, stats) in [("top-k", &e.stats_topk), ("overall", &e.stats_overall)] {
            let _ = writeln!(
                out,
                "<tr><td>{}</td><td>{scope}</td>{}</tr>",
                esc(&e.attribute),
                stats_cells(Some(stats))
            );
        }
    }
    out.push_str("</table></details>\n</section>\n");
}

fn ingredients(out: &mut String, label: &NutritionalLabel) {
    open_widget(out, "ingredients", "Ingredients", None);
    let rep = &label.ingredients;
    let _ = writeln!(
        out,
        "<div class=\"overview\"><p>Attributes strongly associated with the score (|correlation| at least {}):</p><ul>",
        num(rep.strength_threshold)
    );
    for e in rep.entries.iter().filter(|e| e.strong) {
        let _ = writeln!(out, "<li>{} ({})</li>", esc(&e.attribute), num(e.importance));
    }
    out.push_str("</ul></div>\n<details><summary>All numeric attributes</summary>\n");
    out.push_str("<table><tr><th>Attribute</th><th>Importance</th><th>Correlation</th><th>Scope</th><th>Min</th><th>Median</th><th>Max</th></tr>\n");
    for e in &rep.entries {
        let _ = writeln!(
            out,
            "<tr><td>{}</td><td>{}</td><td>{}</td><td>top-k</td>{}</tr>",
            esc(&e.attribute),
            num(e.importance),
            num(e.correlation),
            stats_cells(e.stats_topk.as_ref())
        );
        let _ = writeln!(
            out,
            "<tr><td></td><td></td><td></td><td>overall</td>{}</tr>",
            stats_cells(e.stats_overall.as_ref())
        );
    }
    out.push_str("</table></details>\n</section>\n");
}

fn stability(out: &mut String, label: &NutritionalLabel) {
    let s = &label.stability;
    let verdict = if s.stable_topk && s.stable_overall { "stable" } else { "unstable" };
    open_widget(out, "stability", "Stability", Some(verdict));
    let word = |stable: bool| if stable { "stable" } else { "unstable" };
    let _ = writeln!(
        out,
        "<div class=\"overview\"><table><tr><th>Scope</th><th>Slope</th><th>Verdict</th></tr>\n\
         <tr><td>top-k</td><td>{}</td><td><span class=\"badge {ta}\">{ta}</span></td></tr>\n\
         <tr><td>overall</td><td>{}</td><td><span class=\"badge {oa}\">{oa}</span></td></tr>\n</table></div>",
        num(s.slope_topk),
        num(s.slope_overall),
        ta = word(s.stable_topk),
        oa = word(s.stable_overall),
    );
    let _ = writeln!(
        out,
        "<details><summary>Method</summary><p>A score distribution is unstable when the absolute slope of the fitted line is at most {}.</p><p>{}</p></details>",
        num(s.threshold),
        esc(&label.metadata.methodology.stability)
    );
    out.push_str("</section>\n");
}

fn fairness_details(r: &FairnessResult) -> String {
    match &r.details {
        Details::FaIr(d) => {
            let counts = |v: &[usize]| v.iter().map(|&c| num(c)).collect::<Vec<_>>().join(" ");
            let failing = d
                .first_failing_prefix
                .map(|i| format!("; first failing prefix {}", num(i)))
                .unwrap_or_default();
            format!(
                "alpha {}, adjusted alpha {}, p {}, k {}{failing}<br/>protected per prefix: {}<br/>required per prefix: {}",
                num(d.alpha),
                num(d.adjusted_alpha),
                num(d.p),
                num(d.k),
                counts(&d.protected_counts),
                counts(&d.min_counts)
            )
        }
        Details::Proportion(d) => format!(
            "alpha {}, p {}, k {}, protected in top-k {} (share {}), z {}",
            num(d.alpha),
            num(d.p),
            num(d.k),
            num(d.protected_in_topk),
            num(d.topk_proportion),
            num(d.z)
        ),
        Details::Pairwise(d) => format!(
            "alpha {}, protected {}, non-protected {}, preferred pairs {} of {}, U {}, z {}",
            num(d.alpha),
            num(d.n_protected),
            num(d.n_unprotected),
            num(d.preferred_pairs),
            num(d.total_pairs),
            num(d.u),
            num(d.z)
        ),
    }
}

fn fairness(out: &mut String, label: &NutritionalLabel) {
    let all_fair = label.fairness.iter().all(|r| r.fair);
    open_widget(out, "fairness", "Fairness", Some(if all_fair { "fair" } else { "unfair" }));
    out.push_str("<div class=\"overview\"><table><tr><th>Protected feature</th><th>Measure</th><th>Verdict</th></tr>\n");
    for r in &label.fairness {
        let verdict = if r.fair { "fair" } else { "unfair" };
        let _ = writeln!(
            out,
            "<tr data-verdict=\"{verdict}\"><td>{}={}</td><td>{}</td><td><span class=\"badge {verdict}\">{verdict}</span></td></tr>",
            esc(&r.protected_attribute),
            esc(&r.protected_value),
            r.measure.title()
        );
    }
    out.push_str("</table></div>\n<details><summary>Test computations</summary>\n");
    out.push_str("<table><tr><th>Feature</th><th>Measure</th><th>Statistic</th><th>p-value</th><th>Direction</th><th>Details</th></tr>\n");
    for r in &label.fairness {
        let direction = match r.direction {
            Direction::Under => "under",
            Direction::Over => "over",
            Direction::None => "none",
        };
        let _ = writeln!(
            out,
            "<tr><td>{}={}</td><td>{}</td><td>{}</td><td>{}</td><td>{direction}</td><td>{}</td></tr>",
            esc(&r.protected_attribute),
            esc(&r.protected_value),
            r.measure.title(),
            num(r.statistic),
            r.p_value.map(num).unwrap_or_else(|| "-".into()),
            fairness_details(r)
        );
    }
    out.push_str("</table></details>\n</section>\n");
}

fn proportion_table(out: &mut String, attribute: &str, shares: &BTreeMap<String, f64>) {
    let _ = writeln!(out, "<h3>{}</h3><table>", esc(attribute));
    for (category, share) in shares {
        let width = (share * 100.0).round();
        let _ = writeln!(
            out,
            "<tr><td>{}</td><td>{}</td><td><span class=\"bar\" style=\"width: {width}px\"></span></td></tr>",
            esc(category),
            num(share)
        );
    }
    out.push_str("</table>\n");
}

fn diversity(out: &mut String, label: &NutritionalLabel, topk: bool) {
    let (id, title) = if topk {
        ("diversity-topk", "Diversity at top-k")
    } else {
        ("diversity-overall", "Diversity overall")
    };
    open_widget(out, id, title, None);
    let mut reports = label.diversity.iter();
    out.push_str("<div class=\"overview\">\n");
    if let Some(first) = reports.next() {
        proportion_table(out, &first.attribute, if topk { &first.topk } else { &first.overall });
    }
    out.push_str("</div>\n<details><summary>Other attributes</summary>\n");
    for rep in reports {
        proportion_table(out, &rep.attribute, if topk { &rep.topk } else { &rep.overall });
    }
    out.push_str("</details>\n</section>\n");
}

/// Single HTML document with six collapsible widget sections.
pub fn render_html(label: &NutritionalLabel) -> Vec<u8> {
    let m = &label.metadata;
    let mut out = String::with_capacity(16 * 1024);
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\"/>\n");
    out.push_str("<title>Ranking Facts</title>\n<style>");
    out.push_str(STYLE);
    out.push_str("</style>\n</head>\n<body>\n<main class=\"label\">\n");
    let weights = m
        .weights
        .iter()
        .map(|(a, w)| format!("{} {}", esc(a), num(w)))
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(
        out,
        "<header><h1>Ranking Facts</h1>\n<p>{} of {} rows ranked ({} dropped), top-k with k = {}, alpha = {}, normalization {}.</p>\n<p>Weights: {weights}</p></header>",
        num(m.retained_rows),
        num(m.row_count),
        num(m.dropped_rows),
        num(m.k),
        num(m.alpha),
        m.normalization
    );
    recipe(&mut out, label);
    ingredients(&mut out, label);
    stability(&mut out, label);
    fairness(&mut out, label);
    diversity(&mut out, label, true);
    diversity(&mut out, label, false);
    let _ = writeln!(
        out,
        "<footer><p>Dataset digest <code>{}</code>; engine {}; label schema {}.</p></footer>",
        esc(&m.dataset_digest),
        esc(&m.engine_version),
        esc(&label.label_schema)
    );
    out.push_str("</main>\n</body>\n</html>\n");
    out.into_bytes()
}
