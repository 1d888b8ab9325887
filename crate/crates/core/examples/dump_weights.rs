//! Writes the default model's weights as little-endian f32 in draw order
//! (embedding, then per layer wq wk wv wo w_up w_down, then unembedding).
//! Norm gains are all 1 and are not written.
//!
//! cargo run -p cortex-core --example dump_weights -- weights.bin

use std::io::{BufWriter, Write};

use cortex_core::model::{init_weights, ModelConfig};

fn main() -> cortex_core::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "weights.bin".into());
    let w = init_weights(&ModelConfig::default())?;
    let mut f = BufWriter::new(std::fs::File::create(&path)?);
    let mut put = |v: &[f32]| -> std::io::Result<()> {
        for x in v {
            f.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    };
    for t in 0..w.config().vocab_size {
        put(w.embedding_row(t))?;
    }
    for l in w.layers() {
        for m in [l.wq(), l.wk(), l.wv(), l.wo(), l.w_up(), l.w_down()] {
            put(m)?;
        }
    }
    put(w.unembedding())?;
    Ok(())
}
