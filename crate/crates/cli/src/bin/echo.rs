//! Identity system for exercising the external-process boundary: copies
//! every input channel `c` of `<input.csv>` to an output channel `c_echo`.

use std::path::Path;
use std::process::ExitCode;

use falsibo::trace::Trace;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [input, output] = args.as_slice() else {
        eprintln!("usage: falsibo-echo <input.csv> <output.csv>");
        return ExitCode::from(2);
    };
    let echoed = Trace::load(Path::new(input)).and_then(|t| {
        let channels = t
            .channels()
            .iter()
            .map(|(name, values)| (format!("{name}_echo"), values.clone()))
            .collect();
        Trace::new(t.times().to_vec(), channels)
    });
    match echoed.and_then(|t| t.save(Path::new(output))) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("falsibo-echo: {e}");
            ExitCode::FAILURE
        }
    }
}
