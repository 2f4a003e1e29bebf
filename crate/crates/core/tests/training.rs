use groundplane::assignment::{build_anchor_grid, AnchorGrid, ToleranceEta};
use groundplane::codec::nms_benchmark;
use groundplane::datagen::synthetic_nms_workload;
use groundplane::geometry::{reconstruct_parallelogram, Point2, Triangle25};
use groundplane::loss::LossVariant;
use groundplane::metrics::GroundTruthLabel;
use groundplane::toytrain::{train_offsets, TrainConfig};

fn scene() -> (Vec<GroundTruthLabel>, AnchorGrid) {
    let tri = |c: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        let t = Triangle25::new(
            Point2::new(c.0, c.1),
            Point2::new(a.0, a.1),
            Point2::new(b.0, b.1),
        );
        GroundTruthLabel {
            footprint: reconstruct_parallelogram(&t).unwrap(),
            class_id: 0,
        }
    };
    let labels = vec![
        tri((60.0, 60.0), (30.0, 45.0), (35.0, 80.0)),
        tri((190.0, 70.0), (170.0, 40.0), (215.0, 50.0)),
        tri((120.0, 180.0), (95.0, 200.0), (150.0, 195.0)),
    ];
    (labels, build_anchor_grid(256.0, 256.0, 8.0).unwrap())
}

#[test]
fn ordered_loss_under_flips_plateaus_far_above_chamfer() {
    let (labels, grid) = scene();
    let eta = ToleranceEta::for_stride(grid.stride);
    let run = |loss, flip_prob| {
        let cfg = TrainConfig {
            loss,
            flip_prob,
            seed: 7,
            ..TrainConfig::default()
        };
        train_offsets(&labels, &grid, eta, &cfg).unwrap().trace
    };
    let chamfer = run(LossVariant::ChamferMse, 0.5);
    let ordered = run(LossVariant::OrderedMse, 0.5);
    assert!(
        chamfer.mean_vertex_error < 0.1,
        "{}",
        chamfer.mean_vertex_error
    );
    let ratio = ordered.plateau_loss().unwrap() / chamfer.plateau_loss().unwrap();
    assert!(ratio >= 10.0, "plateau ratio {ratio}");
    assert!(ordered.mean_vertex_error > 1.0);
}

#[test]
fn rectangle_nms_discrepancy_on_synthetic_workload_is_small() {
    let dets = synthetic_nms_workload(2000, 3).unwrap();
    assert_eq!(dets.len(), 2000);
    let bench = nms_benchmark(&dets, 0.5, 11).unwrap();
    let r = &bench.report;
    assert!(r.pairs_examined > 0);
    assert!(
        r.mean_abs_iou_discrepancy < 0.15,
        "{}",
        r.mean_abs_iou_discrepancy
    );
    assert!((0.0..=1.0).contains(&r.kept_disagreement_rate));
}
