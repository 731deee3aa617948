use std::fmt::Write as _;

use anyhow::Result;
use rankfx::inference::Transform;
use rankfx::simulation::{PowerTable, SimulationReport};
use rankfx::Report;

pub fn p_value(p: f64) -> String {
    if p < 1e-4 {
        "<0.0001".to_string()
    } else {
        format!("{p:.4}")
    }
}

fn table(out: &mut String, header: &[&str], left: usize, rows: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::from(" ");
        for (k, (c, w)) in cells.iter().zip(&width).enumerate() {
            if k < left {
                let _ = write!(s, " {c:<w$}");
            } else {
                let _ = write!(s, "  {c:>w$}");
            }
        }
        s.trim_end().to_string() + "\n"
    };
    out.push_str(&line(header.to_vec()));
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
}

pub fn analysis_text(r: &Report) -> String {
    let mut out = String::new();
    let m = &r.metadata;
    let _ = writeln!(out, "Rank-based analysis: N = {}, {} groups", m.total, r.effects.len());
    out.push('\n');

    let level = r.cis.first().map(|c| c.level).unwrap_or(1.0 - m.alpha);
    let tf = match m.transform {
        Transform::Logit => "logit",
        Transform::Identity => "identity",
    };
    let _ = writeln!(out, "Unweighted effects with {:.0}% confidence intervals ({tf})", level * 100.0);
    let rows: Vec<Vec<String>> = r
        .effects
        .iter()
        .zip(&r.cis)
        .zip(&r.weighted_effects)
        .map(|((e, c), w)| {
            vec![
                e.label.clone(),
                e.n.to_string(),
                format!("{:.4}", e.estimate),
                format!("{:.4}", c.lower),
                format!("{:.4}", c.upper),
                format!("{w:.4}"),
            ]
        })
        .collect();
    table(&mut out, &["group", "n", "effect", "lower", "upper", "weighted"], 1, &rows);

    if let Some(dec) = &r.decomposition {
        out.push('\n');
        out.push_str("Additive decomposition\n");
        let mut rows = Vec::new();
        for (i, a) in dec.alpha.iter().enumerate() {
            rows.push(vec![format!("A{}", i + 1), format!("{a:.4}")]);
        }
        for (j, b) in dec.beta.iter().enumerate() {
            rows.push(vec![format!("B{}", j + 1), format!("{b:.4}")]);
        }
        for (i, g) in dec.gamma.iter().enumerate() {
            for (j, v) in g.iter().enumerate() {
                rows.push(vec![format!("AB{}{}", i + 1, j + 1), format!("{v:.4}")]);
            }
        }
        table(&mut out, &["term", "value"], 1, &rows);
    }

    out.push('\n');
    let _ = writeln!(out, "Tests (alpha = {})", m.alpha);
    let rows: Vec<Vec<String>> = r
        .tests
        .iter()
        .map(|t| {
            let res = &t.result;
            vec![
                t.hypothesis.clone(),
                res.method.to_string(),
                format!("{:.4}", res.statistic),
                format!("{:.3}", res.df.f),
                res.df.f1.map(|f| format!("{f:.3}")).unwrap_or_else(|| "-".into()),
                p_value(res.p_value),
                format!("{:.4}", res.critical_value),
                if res.reject { "yes".into() } else { "no".into() },
            ]
        })
        .collect();
    table(
        &mut out,
        &["hypothesis", "method", "statistic", "df", "df2", "p-value", "critical", "reject"],
        2,
        &rows,
    );
    if r.tests.iter().any(|t| t.result.mc_runs.is_some()) {
        let _ = writeln!(out, "\nats-eigen critical values from {} Monte-Carlo runs, seed {}", m.mc_runs, m.seed);
    }
    out
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn type_one_csv(r: &SimulationReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["setting".to_string(), "distribution".into(), "sizes".into(), "nsim".into(), "alpha".into(), "seed".into()];
    header.extend(r.rates.iter().map(|m| m.method.to_string()));
    header.push("failures".into());
    w.write_record(&header)?;
    let sizes: Vec<String> = r.setting.sizes.iter().map(usize::to_string).collect();
    let mut row = vec![
        r.setting.id.map(|i| i.to_string()).unwrap_or_else(|| "custom".into()),
        r.setting.distribution.to_string(),
        sizes.join("/"),
        r.nsim.to_string(),
        r.alpha.to_string(),
        r.seed.to_string(),
    ];
    row.extend(r.rates.iter().map(|m| m.rate.to_string()));
    row.push(r.rates.iter().map(|m| m.failures).sum::<usize>().to_string());
    w.write_record(&row)?;
    finish(w)
}

pub fn power_csv(t: &PowerTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["alternative".to_string(), "n".into(), "delta".into()];
    header.extend(t.methods.iter().map(|m| m.to_string()));
    w.write_record(&header)?;
    for row in &t.rows {
        let mut rec = vec![t.alternative.as_str().to_string(), t.n.to_string(), format!("{:.1}", row.delta)];
        rec.extend(row.rates.iter().map(|m| m.rate.to_string()));
        w.write_record(&rec)?;
    }
    finish(w)
}

pub fn effect_fn_csv(rows: &[(f64, f64)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "value"])?;
    for (x, v) in rows {
        w.write_record([x.to_string(), v.to_string()])?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_value_display() {
        assert_eq!(p_value(3e-7), "<0.0001");
        assert_eq!(p_value(0.18324), "0.1832");
    }

    #[test]
    fn aligned_columns() {
        let mut s = String::new();
        table(&mut s, &["a", "bb"], 1, &[vec!["long".into(), "1".into()]]);
        assert_eq!(s, "  a     bb\n  long   1\n");
    }
}
