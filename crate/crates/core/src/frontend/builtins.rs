use super::{parse_program, Program};
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: &[&str] = &["mutex", "broken-mutex", "allocator"];

/// Source text of a builtin example instantiated for `n` processes.
pub fn builtin_source(name: &str, n: usize) -> Result<String> {
    if n < 1 {
        return Err(Error::InvalidProcessCount);
    }
    let text = match name {
        "mutex" => format!(
            "# Test-and-set mutual exclusion: enter C only if nobody else is there.\n\
             processes {n};\n\
             pc {{T, W, C}};\n\
             init pc=T;\n\
             T -> W : true /;\n\
             W -> C : all_others(pc != C) /;\n\
             C -> T : true /;\n\
             label bad := count(pc=C) >= 2;\n\
             label good := count(pc=C) >= 1;\n"
        ),
        "broken-mutex" => format!(
            "# Mutex with the entry check removed.\n\
             processes {n};\n\
             pc {{T, W, C}};\n\
             init pc=T;\n\
             T -> W : true /;\n\
             W -> C : true /;\n\
             C -> T : true /;\n\
             label bad := count(pc=C) >= 2;\n\
             label good := count(pc=C) >= 1;\n"
        ),
        "allocator" => format!(
            "# Single-resource allocator; grant names the holder.\n\
             processes {n};\n\
             shared grant : pid;\n\
             pc {{ready, req, exec}};\n\
             init pc=ready, grant=none;\n\
             ready -> req : true /;\n\
             req -> exec : grant == none / grant := self;\n\
             exec -> ready : true / grant := none;\n\
             label bad := count(pc=exec) >= 2;\n\
             label good := grant == none;\n"
        ),
        other => return Err(Error::UnknownBuiltin(other.to_string())),
    };
    Ok(text)
}

pub fn builtin_example(name: &str, n: usize) -> Result<Program> {
    parse_program(&builtin_source(name, n)?).map_err(Error::Parse)
}
