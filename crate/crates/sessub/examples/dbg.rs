use sessub::*;
use sessub::simgraph::SimEdge;
fn main() {
    let sub = build_lts(&parse("rec X. +{nd; &{ko;X, ok; +{pr;X}}}").unwrap());
    let sup = build_lts(&parse("rec X. +{nd; &{ko;X, ok;X}, pr; &{ko;X, ok;X}}").unwrap());
    let (v, g) = check_async(&sub, &sup, AsyncOpts::default());
    println!("verdict: {v}, steps: {}", g.meta.steps);
    for n in &g.nodes {
        println!("n{}: {:?} {}", n.id, n.kind, n.caption());
    }
    for e in &g.edges {
        match e {
            SimEdge::Step { from, to, action } => println!("n{from} -[{action}]-> n{to}"),
            SimEdge::BackLink { from, to, kind } => println!("n{from} ~~> n{to} ({kind:?})"),
        }
    }
}
