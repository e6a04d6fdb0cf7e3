//! Print the 8-node worked example: membership, coarsening, coarse
//! membership, relative sizes, and the community correlation matrix.
//!
//! Run with: cargo run --example worked_example

fn main() {
    print!("{}", coarsectrl::checks::example1_report().unwrap());
}
