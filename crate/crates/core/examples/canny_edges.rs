//! Renders a simulator frame, runs the edge detector and prints both as
//! coarse ASCII art. Pass a directory to also write the frame and mask as
//! PGM files.
//!
//!     cargo run --example canny_edges -- [out_dir]

use std::fs::File;

use vla_accel::config::CannyParams;
use vla_accel::io::write_pgm;
use vla_accel::pruning::{canny_edges, GrayImage};
use vla_accel::sim::scene::{render_scene, Camera};

fn ascii(img: &GrayImage, step: usize) -> String {
    let ramp = b" .:-=+*#%@";
    let mut out = String::new();
    for y in (0..img.height()).step_by(step) {
        for x in (0..img.width()).step_by(step / 2) {
            out.push(ramp[img.get(x, y) as usize * (ramp.len() - 1) / 255] as char);
        }
        out.push('\n');
    }
    out
}

fn main() -> vla_accel::Result<()> {
    let (start, goal) = ([0.0, 0.0, 0.0], [3.0, -2.0, 1.0]);
    let cam = Camera::framing(start, goal, 96);
    let frame = render_scene(&cam, [1.0, -0.5, 0.6], 1, goal);
    let mask = canny_edges(&frame, &CannyParams::default())?;
    println!("frame:\n{}", ascii(&frame, 4));
    println!(
        "edges ({} pixels):\n{}",
        mask.count(),
        ascii(&mask.to_image(), 4)
    );

    if let Some(dir) = std::env::args().nth(1) {
        write_pgm(&frame, File::create(format!("{dir}/frame.pgm"))?)?;
        write_pgm(&mask.to_image(), File::create(format!("{dir}/edges.pgm"))?)?;
        println!("wrote {dir}/frame.pgm and {dir}/edges.pgm");
    }
    Ok(())
}
