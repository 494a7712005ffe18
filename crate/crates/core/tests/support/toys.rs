//! Task graphs small enough for exhaustive enumeration.

use winomem::pebble::TaskGraph;

/// One block row of a classical product: `[A11 A12] * B`.
pub const ROW: &str = "
node A11 initial A11
node A12 initial A12
node B11 initial B11
node B12 initial B12
node B21 initial B21
node B22 initial B22
node P1 temp
node P2 temp
node P3 temp
node P4 temp
node R1 final C11
node R2 final C12
prod P1 A11 B11
prod P2 A12 B21
prod P3 A11 B12
prod P4 A12 B22
edge P1 R1 +
edge P2 R1 +
edge P3 R2 +
edge P4 R2 +
";

/// The same row accumulated onto C.
pub const ROW_ACC: &str = "
node A11 initial A11
node A12 initial A12
node B11 initial B11
node B12 initial B12
node B21 initial B21
node B22 initial B22
node C11 initial C11
node C12 initial C12
node P1 temp
node P2 temp
node P3 temp
node P4 temp
node R1 final C11
node R2 final C12
prod P1 A11 B11
prod P2 A12 B21
prod P3 A11 B12
prod P4 A12 B22
edge C11 R1 +
edge P1 R1 +
edge P2 R1 +
edge C12 R2 +
edge P3 R2 +
edge P4 R2 +
";

/// Sums feeding a product, in the style of the Winograd graph.
pub const SUMS: &str = "
node A11 initial A11
node A12 initial A12
node B11 initial B11
node B12 initial B12
node S temp
node T temp
node P temp
node Q temp
node U1 final C11
node U2 final C12
edge A11 S +
edge A12 S -
edge B12 T +
edge B11 T -
prod P S T
prod Q A12 B12
edge P U1 +
edge Q U1 +
edge Q U2 +
edge A11 U2 -
";

pub fn all() -> Vec<(&'static str, TaskGraph)> {
    [("row", ROW), ("row-acc", ROW_ACC), ("sums", SUMS)]
        .into_iter()
        .map(|(name, text)| (name, TaskGraph::parse(text).unwrap()))
        .collect()
}
