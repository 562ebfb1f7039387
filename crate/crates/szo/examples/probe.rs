// Temporary calibration probe; not part of the deliverable.
use szo::es_sim::{integrate_es, EsParams};

fn main() {
    let params = EsParams::unfiltered(0.1, 1000.0).unwrap();
    let f = |x: f64| x * x;
    for div in [20.0f64, 25.0, 30.0, 40.0, 60.0] {
        let dt0 = params.period() / div;
        let n = (0.25 / dt0).floor();
        let horizon = n * dt0;
        let endpoint = |dt: f64| {
            integrate_es(1.0, &params, &f, horizon, dt)
                .unwrap()
                .states
                .last()
                .unwrap()
                .x
        };
        let x0 = endpoint(dt0);
        let x1 = endpoint(dt0 / 2.0);
        let x2 = endpoint(dt0 / 4.0);
        let order = ((x0 - x1).abs() / (x1 - x2).abs()).log2();
        println!(
            "period/{div:5}: order {order:.3}  (diffs {:.3e} / {:.3e})",
            (x0 - x1).abs(),
            (x1 - x2).abs()
        );
    }
}
