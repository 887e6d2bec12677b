//! Compilation of Positive NAE 3SAT into k-colorable perfect matching
//! instances.
//!
//! A 2-colorable perfect matching (2-CPM) asks for a 2-coloring in which
//! every node has exactly one neighbor of its own color; the monochromatic
//! edges then form a perfect matching. The pipeline in [`reduce2`] compiles a
//! clause-connected formula into a 2-connected 3-regular planar 2-CPM
//! instance (with a rotation-system planarity certificate), [`reducek`]
//! lifts instances from 2 to k colors, [`solver`] decides and enumerates
//! colorings exactly, and [`gadgets`] certifies every gadget's forced
//! behavior by enumeration.

pub mod certify;
pub mod dot;
mod engine;
pub mod formula;
pub mod gadgets;
pub mod graph;
pub mod graphfile;
pub mod reduce2;
pub mod reducek;
mod sat;
pub mod smallgraphs;
pub mod solver;
