//! Placeholder entry point; the real CLI lands with the full module stack.

fn main() {
    println!("exangulate: work in progress");
}
