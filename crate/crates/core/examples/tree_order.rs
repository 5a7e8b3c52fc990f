//! Node indices, the length-lexicographic order and the breadth-first
//! frontier the samplers walk.

use spinetail::tree::{lenlex_compare, Frontier, NodeIndex, NodeState};

fn main() -> spinetail::Result<()> {
    let mut nodes = [
        NodeIndex::from_path(vec![2, 1])?,
        NodeIndex::from_path(vec![1, 1, 1])?,
        NodeIndex::root(),
        NodeIndex::from_path(vec![3])?,
        NodeIndex::from_path(vec![1, 2])?,
        NodeIndex::from_path(vec![1])?,
    ];
    nodes.sort_by(lenlex_compare);
    println!(
        "{:?}",
        nodes.iter().map(|n| n.path().to_vec()).collect::<Vec<_>>()
    );

    let root = NodeState::root();
    let mut frontier = Frontier::new();
    frontier.push(root.child(1, 0.5, true)?);
    frontier.push(root.child(2, 2.0, false)?);
    while let Ok(node) = frontier.advance() {
        println!(
            "visit {:?}: S = {:.3}, spine = {}",
            node.index.path(),
            node.log_weight,
            node.on_spine
        );
        if node.index.generation() < 2 {
            frontier.push(node.child(1, 0.9, node.on_spine)?);
        }
    }
    Ok(())
}
