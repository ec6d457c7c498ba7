use emergentq::catalog::{builtin, BUILTIN_NAMES};
use emergentq::ghost::{broken_control, random_sweep};

#[test]
fn builtin_actions_are_brst_and_superfield_exact() {
    for name in BUILTIN_NAMES {
        let compiled = builtin(name).unwrap().compile().unwrap();
        let sys = &compiled.sys;
        let params = sys.space.params().to_vec();
        let report = random_sweep(sys.coords(), &sys.f, &params, 3..=6, 20, 7).unwrap();
        assert_eq!(report.cases.len(), 80);
        assert!(report.passed(), "{name}: {:?}", report.failures().collect::<Vec<_>>());
        let broken = broken_control(sys.coords(), &sys.f, &params, 4, 7).unwrap();
        assert!(!broken.is_zero(), "{name}: breaking term went unnoticed");
    }
}
