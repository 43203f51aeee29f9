//! CSV and JSON renderings of analysis results. Every writer produces the
//! same bytes for the same input.

use crate::activation::{Histogram, LayerActivationProfile};
use crate::eval::EvalResult;
use crate::llmdcos::{LlmdcosReport, RelevanceMatrix, SemanticEval};

fn csv_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    build(&mut w).expect("writing to memory cannot fail");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

/// `layer,bucket_index,bucket_mean`
pub fn profile_csv(profile: &LayerActivationProfile) -> String {
    csv_string(|w| {
        w.write_record(["layer", "bucket_index", "bucket_mean"])?;
        for (i, m) in profile.bucket_means.iter().enumerate() {
            w.write_record([profile.layer.to_string(), i.to_string(), m.to_string()])?;
        }
        Ok(())
    })
}

/// `bin_low,bin_high,count`
pub fn histogram_csv(h: &Histogram) -> String {
    csv_string(|w| {
        w.write_record(["bin_low", "bin_high", "count"])?;
        for (i, c) in h.counts.iter().enumerate() {
            w.write_record([h.edges[i].to_string(), h.edges[i + 1].to_string(), c.to_string()])?;
        }
        Ok(())
    })
}

/// `pair_id,layer,cosine`
pub fn pairs_csv(reports: &[LlmdcosReport]) -> String {
    csv_string(|w| {
        w.write_record(["pair_id", "layer", "cosine"])?;
        for r in reports {
            let id = r.pair.label();
            for (l, c) in r.cosines.iter().enumerate() {
                w.write_record([id.clone(), (l + 1).to_string(), c.to_string()])?;
            }
        }
        Ok(())
    })
}

/// Square grid with dataset names as header row and first column.
pub fn relevance_csv(m: &RelevanceMatrix) -> String {
    csv_string(|w| {
        let mut header = vec!["dataset".to_string()];
        header.extend(m.names.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in m.names.iter().zip(&m.values) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

/// `pair_index,score,gold`
pub fn semsim_csv(e: &SemanticEval) -> String {
    csv_string(|w| {
        w.write_record(["pair_index", "score", "gold"])?;
        for (i, (s, g)) in e.scores.iter().zip(&e.gold).enumerate() {
            w.write_record([i.to_string(), s.to_string(), g.to_string()])?;
        }
        Ok(())
    })
}

/// One JSON object per line.
pub fn eval_jsonl(results: &[EvalResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&serde_json::to_string(r).expect("EvalResult serializes"));
        out.push('\n');
    }
    out
}
