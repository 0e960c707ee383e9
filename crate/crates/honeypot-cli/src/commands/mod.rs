//! One module per subcommand.

mod bench;
mod evaluate;
mod generate;
mod serve;
mod simulate;
mod train;

pub use bench::bench;
pub use evaluate::evaluate;
pub use generate::generate;
pub use serve::serve;
pub use simulate::simulate;
pub use train::train;

use std::io::Write;

use serde::Serialize;

/// Every run announces the configuration it actually executes, with flag
/// values already folded over file values and defaults.
fn print_resolved(name: &str, config: &impl Serialize) -> anyhow::Result<()> {
    let text = toml::to_string_pretty(config)?;
    println!("resolved configuration ({name}):");
    for line in text.lines() {
        println!("  {line}");
    }
    println!();
    std::io::stdout().flush()?;
    Ok(())
}
