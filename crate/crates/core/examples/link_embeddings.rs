//! Dumps scripted embeddings of a paper's linked papers and of a topic, for
//! building offline ranking oracles.
//!
//! cargo run -p coexplore-core --example link_embeddings -- CORPUS PAPER_ID DIRECTION TOPIC

use coexplore_core::llm::scripted_embedding;
use coexplore_core::scholar::{Corpus, LinkDirection};
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [corpus, paper_id, direction, topic] = args.as_slice() else {
        return Err("usage: link_embeddings CORPUS PAPER_ID DIRECTION TOPIC".into());
    };
    let corpus = Corpus::load(corpus)?;
    let direction: LinkDirection = direction.parse().map_err(|_| "bad direction")?;
    let papers: Vec<_> = corpus
        .links(paper_id, direction)?
        .into_iter()
        .map(|p| {
            json!({
                "paper_id": p.paper_id,
                "disciplines": p.effective_disciplines(),
                "vector": scripted_embedding(&p.metadata_text()).0,
            })
        })
        .collect();
    let doc = json!({
        "paper_id": paper_id,
        "direction": direction.as_str(),
        "topic": topic,
        "topic_vector": scripted_embedding(topic).0,
        "papers": papers,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}
