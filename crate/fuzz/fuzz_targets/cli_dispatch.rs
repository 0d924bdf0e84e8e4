#![no_main]

use libfuzzer_sys::fuzz_target;
use ncdisint::commands::{run, Command, EXIT_ILL_POSED, EXIT_INPUT, EXIT_OK};
use ncdisint::Tolerance;

const COMMANDS: [Command; 6] = [
    Command::CheckMap,
    Command::AeEqual,
    Command::Disintegrate,
    Command::Classical,
    Command::Measure,
    Command::Compose,
];

fuzz_target!(|data: &[u8]| {
    // first byte picks the subcommand; keep inputs small so each run stays fast
    let Some((&pick, input)) = data.split_first() else { return };
    if input.len() > 4096 {
        return;
    }
    let out = run(COMMANDS[pick as usize % COMMANDS.len()], input, &Tolerance::default());
    assert!([EXIT_OK, EXIT_INPUT, EXIT_ILL_POSED].contains(&out.code));
    if out.code == EXIT_OK {
        serde_json::from_str::<serde_json::Value>(&out.stdout).expect("stdout is JSON");
    }
});
