use bandshift::io::{load_scene, read_report, save_scene, write_report, RasterFormat};
use bandshift::pipeline::{analyze, detection_report, AnalysisConfig, DetectionConfig};
use bandshift::sim::{simulate, BandValues, ObjectScript, SceneScript, Shape};
use bandshift::Vec2;

fn scene_script() -> SceneScript {
    let mut s = SceneScript::new(192, 160, 3.0);
    s.scene_id = "20230101_120000_07_24a1".into();
    s.noise_sigma_dn = 4.0;
    s.seed = 5;
    s.objects = vec![ObjectScript {
        shape: Shape::Ellipse,
        length_m: 15.0,
        width_m: 8.0,
        orientation_deg: None,
        reflectance_dn: BandValues::Uniform(3500.0),
        position_m: Vec2::new(120.0, 200.0),
        velocity_mps: Vec2::new(45.0, 10.0),
        altitude_m: 0.0,
    }];
    s
}

#[test]
fn scenes_survive_a_disk_round_trip() {
    let sim = simulate(&scene_script()).unwrap();
    for format in [RasterFormat::Pgm, RasterFormat::Png] {
        let dir = tempfile::tempdir().unwrap();
        let manifest = save_scene(&sim.scene, dir.path(), format).unwrap();
        let loaded = load_scene(&manifest).unwrap();
        assert_eq!(loaded, sim.scene, "{format:?}");
    }
}

#[test]
fn reports_survive_a_disk_round_trip() {
    let sim = simulate(&scene_script()).unwrap();
    let (report, _) = detection_report(&sim.scene, &DetectionConfig::default()).unwrap();
    assert_eq!(report.tracks.len(), 1);
    let timing = sim.scene.timing().unwrap();
    let analysis = analyze(&report, &timing, &AnalysisConfig::default()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let (dp, ap) = (dir.path().join("d.json"), dir.path().join("a.json"));
    write_report(&dp, &report).unwrap();
    write_report(&ap, &analysis).unwrap();
    assert_eq!(read_report::<bandshift::io::DetectionReport>(&dp).unwrap(), report);
    assert_eq!(read_report::<bandshift::io::AnalysisReport>(&ap).unwrap(), analysis);
}

#[test]
fn missing_band_is_reported() {
    let sim = simulate(&scene_script()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = save_scene(&sim.scene, dir.path(), RasterFormat::Pgm).unwrap();
    std::fs::remove_file(dir.path().join("Y.pgm")).unwrap();
    assert!(load_scene(&manifest).is_err());
}
