use std::path::PathBuf;

use drq_core::mars::MarsConfig;
use drq_core::redcode::{emit, parse_with, AsmOptions};
use serde_json::json;

use crate::config::{FileConfig, MarsArgs};
use crate::failure::{read_err, Failure};
use crate::load::stem;

#[derive(clap::Args)]
pub struct Args {
    file: PathBuf,
    /// Print a JSON record instead of text.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    mars: MarsArgs,
}

pub fn run(args: Args, file: &FileConfig) -> Result<(), Failure> {
    let mars = args.mars.resolve(&file.mars, MarsConfig::PAPER)?;
    let text = std::fs::read_to_string(&args.file).map_err(read_err(&args.file))?;
    let asm = AsmOptions::new(mars.core_size, mars.max_length as usize).with_default_name(stem(&args.file));
    let path = args.file.display().to_string();
    match parse_with(&text, &asm) {
        Ok(w) => {
            let canonical = emit(&w);
            if args.json {
                let record = json!({
                    "ok": true,
                    "file": path,
                    "name": w.name,
                    "digest": w.digest_hex(),
                    "length": w.len(),
                    "start": w.start,
                    "canonical": canonical,
                });
                println!("{record}");
            } else {
                println!("{canonical}");
            }
            Ok(())
        }
        Err(e) if args.json => {
            let record = json!({ "ok": false, "file": path, "line": e.line, "error": e.kind.to_string() });
            println!("{record}");
            Err(Failure::input(""))
        }
        Err(e) => Err(Failure::input(format!("{path}:{}: {}", e.line, e.kind))),
    }
}
