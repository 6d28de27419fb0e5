// Train IBM Model 1 on a toy corpus, extract links, reorder and project labels.

use std::error::Error;

use xltransfer::align::{project_labels, reorder_target, Ibm1Aligner};
use xltransfer::codec::{render_annotated, LabeledSentence};

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let pairs = vec![
        (toks("the house"), toks("das haus")),
        (toks("the book"), toks("das buch")),
        (toks("a book"), toks("ein buch")),
    ];
    let aligner = Ibm1Aligner::train(&pairs, 10, true, false)?;
    let mut out = format!("p(das | the) = {:.3}\n", aligner.forward.prob("das", "the"));

    let source = LabeledSentence::from_pairs([("the", None), ("book", Some("object"))])?;
    let target = toks("buch das");
    let links = aligner.align(source.tokens(), &target);
    out.push_str(&format!("links: {}\n", links.to_pharaoh()));
    out.push_str(&format!("reordered: {}\n", reorder_target(&target, &links).join(" ")));
    out.push_str(&format!("projected: {}\n", render_annotated(&project_labels(&source, &target, &links))));
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
