//! Synthesize high-aspect-ratio annotations and convert them to boxes.

use piou::annot::{aspect_ratio, aqbb_to_obb, parse_annotations, synth_dataset, write_jsonl, AnnotationFormat, SynthConfig};

fn main() -> piou::Result<()> {
    let recs = synth_dataset(5, &SynthConfig::default(), 42)?;
    let mut jsonl = Vec::new();
    write_jsonl(&recs, &mut jsonl)?;
    print!("{}", String::from_utf8_lossy(&jsonl));

    for rec in parse_annotations(&jsonl[..], AnnotationFormat::JsonLines)? {
        for q in &rec.boxes {
            let b = aqbb_to_obb(q)?;
            println!(
                "{} cx {:.1} cy {:.1} w {:.1} h {:.1} theta {:.2} deg, ratio 1:{:.1}",
                rec.image,
                b.cx(),
                b.cy(),
                b.w(),
                b.h(),
                b.theta().to_degrees(),
                aspect_ratio(&b)
            );
        }
    }
    Ok(())
}
