//! Write the synthetic fixture panel: `tvpfx-synth <dir> [seed]`.

use std::path::PathBuf;
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut args = std::env::args().skip(1);
    let dir = match args.next() {
        Some(d) => PathBuf::from(d),
        None => {
            eprintln!("usage: tvpfx-synth <output-dir> [seed]");
            return ExitCode::from(2);
        }
    };
    let seed = match args.next() {
        None => tvpfx_synth::FIXTURE_SEED,
        Some(s) => match s.parse() {
            Ok(v) => v,
            Err(e) => {
                eprintln!("tvpfx-synth: bad seed `{s}`: {e}");
                return ExitCode::from(2);
            }
        },
    };
    let synthetic = tvpfx_synth::generate(seed);
    if let Err(e) = tvpfx_synth::write_dir(&synthetic, &dir) {
        eprintln!("tvpfx-synth: cannot write {}: {e}", dir.display());
        return ExitCode::FAILURE;
    }
    println!(
        "wrote {} quarters x {} files to {} (seed {seed})",
        tvpfx_synth::QUARTERS,
        synthetic.files.len(),
        dir.display()
    );
    ExitCode::SUCCESS
}
