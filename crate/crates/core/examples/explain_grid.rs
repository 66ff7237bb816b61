//! Explain one classification on a 6x6 binary "image" and write the chosen
//! pixels to a PGM file.

use nacl::explain::render_grid;
use nacl::{lr_to_nb, sufficient_explanation, LogisticRegression, Search};

fn main() -> nacl::Result<()> {
    let side = 6;
    // a vertical bar in the middle columns counts as positive
    let mut weights = vec![-3.0];
    for _row in 0..side {
        for col in 0..side {
            weights.push(if col == 2 || col == 3 { 0.9 } else { -0.4 });
        }
    }
    let lr = LogisticRegression::binary(weights)?;
    let nb = lr_to_nb(&lr, &vec![0.4; side * side])?;

    let x: Vec<u8> = (0..side * side)
        .map(|i| (i % side == 2 || i % side == 3 || i == 0) as u8)
        .collect();
    let ex = sufficient_explanation(&lr, &nb, &x, Search::Greedy)?;
    println!(
        "F(x) = {:.4}; {} of {} supporting pixels suffice ({:?}), expectation {:.4}",
        ex.prediction,
        ex.features.len(),
        ex.partition.support.len(),
        ex.status,
        ex.expectation
    );
    for row in 0..side {
        let line: String = (0..side)
            .map(|col| {
                let i = row * side + col;
                match (ex.features.contains(&i), x[i]) {
                    (true, _) => '#',
                    (false, 1) => 'o',
                    _ => '.',
                }
            })
            .collect();
        println!("{line}");
    }
    let path = std::env::temp_dir().join("nacl_explanation.pgm");
    render_grid(&x, &ex.features, side, side)?.write_pgm(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
