//! Mesa (Pd over SNR × cos²θ) of Kelly and AMF at matched Pfa, and the area
//! between their iso-Pd curves.

use cfarfp::boundary::{BaselineDetector, BaselineKind, Boundary};
use cfarfp::designer::shifted_baseline;
use cfarfp::performance::{abi, mesa};
use cfarfp::stats::ProblemDims;

fn main() -> cfarfp::Result<()> {
    let dims = ProblemDims::new(16, 32)?;
    let pfa = 1e-4;
    let kelly: Boundary = BaselineDetector::new(BaselineKind::Kelly, 0.2)?.into();
    let amf: Boundary = BaselineDetector::new(BaselineKind::Amf, 0.5)?.into();
    // bring both to the same false alarm rate
    let kelly = shifted_baseline(&kelly, pfa, dims)?.boundary.into();
    let amf = shifted_baseline(&amf, pfa, dims)?.boundary.into();

    let g: Vec<f64> = (0..=30).map(|i| i as f64).collect();
    let l: Vec<f64> = (0..=6).map(|j| 0.4 + 0.1 * j as f64).collect();
    let mk = mesa(&kelly, &g, &l, dims)?;
    let ma = mesa(&amf, &g, &l, dims)?;
    print!("Kelly mesa:\n{}", mk.to_csv());
    for level in [0.5, 0.9] {
        let iso_k = mk.iso_contour(level);
        let iso_a = ma.iso_contour(level);
        println!("Pd = {level}");
        for (j, lam) in l.iter().enumerate() {
            let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.2} dB"));
            println!("  cos²θ {lam:.1}: Kelly {:>9}  AMF {:>9}", fmt(iso_k[j]), fmt(iso_a[j]));
        }
        let a = abi(&ma, &mk, level)?;
        println!("  AbI {:.4} over cos²θ in [{}, {}]", a.value, a.lambda_lo, a.lambda_hi);
    }
    Ok(())
}
