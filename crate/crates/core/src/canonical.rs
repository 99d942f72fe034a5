//! Small reference graphs with known structure.

use crate::graph::GraphHandle;

/// Twelve-node bow-tie example.
///
/// IN = {0}, SCC = {1,2,3}, OUT = {4..11}; node 5 is dangling, so the
/// extended SCC is {0..5}. Pure OUT = {6..11} holds two dead-ends {8,9} and
/// {10,11} fed through the transient nodes 6 and 7.
pub fn fig1() -> GraphHandle {
    GraphHandle::from_edges(
        12,
        [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 1),
            (3, 4),
            (4, 5),
            (4, 6),
            (6, 7),
            (7, 8),
            (7, 10),
            (8, 9),
            (9, 8),
            (10, 11),
            (11, 10),
        ],
    )
    .expect("static edge set is in range")
}

/// Nine-node graph in OUT / IN+SCC / DN form with no dangling node fed from OUT.
///
/// Nodes 0-3 form the strongly connected core, 4 and 5 are dangling and
/// linked from the core, and 6-8 form a closed 3-cycle reached from node 3.
pub fn threeblock() -> GraphHandle {
    GraphHandle::from_edges(
        9,
        [
            (0, 1),
            (1, 2),
            (2, 0),
            (2, 3),
            (3, 0),
            (3, 4),
            (1, 5),
            (3, 6),
            (6, 7),
            (7, 8),
            (8, 6),
        ],
    )
    .expect("static edge set is in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_counts() {
        let g = fig1();
        assert_eq!(g.node_count(), 12);
        assert_eq!(g.edge_count(), 14);
        assert_eq!(g.dangling_nodes(), &[5]);
        assert_eq!(g.successors(7), &[8, 10]);
    }

    #[test]
    fn threeblock_counts() {
        let g = threeblock();
        assert_eq!(g.node_count(), 9);
        assert_eq!(g.dangling_nodes(), &[4, 5]);
    }
}
