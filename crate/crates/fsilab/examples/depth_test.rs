// quick probe: deformation decay into the core + cutoff sensitivity
use fsilab::field::{deformation, Grid2D, VectorField, leray_project};
use fsilab::solid::{indicator_mask, DiskProjector, SolidState};

fn main() {
    let grid = Grid2D::new(16.0, 128).unwrap();
    let h = grid.spacing();
    let state = SolidState::at_rest([0.0, 0.0]);
    let mask = indicator_mask(grid, &state, 1.0, 2.0 * h).unwrap();
    let proj = DiskProjector::new(&mask, &state, 4.0).unwrap();
    let v = VectorField::from_fn(grid, |_, y| {
        let w = 0.5 * (1.0 - ((y.abs() - 4.0) / 0.5).tanh());
        [y * w, 0.0]
    });
    let v = leray_project(&v).unwrap();
    let (out, _, _) = proj.project(&v).unwrap();
    let d = deformation(&out).unwrap().magnitude();
    let dg = deformation(&v).unwrap().magnitude().max_abs();
    let n = grid.n();
    for depth in 0..7 {
        let rmax = 1.0 - depth as f64 * h;
        if rmax <= 0.0 { break; }
        let mut mx = 0.0f64;
        for iy in 0..n { for ix in 0..n {
            let x = grid.coord(ix); let y = grid.coord(iy);
            if (x*x+y*y).sqrt() <= rmax {
                mx = mx.max(d.data[iy*n+ix]);
            }
        }}
        println!("r <= {:.3}: maxD = {:.3e}  (/grad {:.2e})", rmax, mx, mx/dg);
    }
}
