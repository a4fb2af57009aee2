use univset::construct::{extend_universal, probe_rules};
use univset::field::FieldCtx;
use univset::universal::PointSet;

fn main() {
    let ctx = FieldCtx::quadratic(-5).unwrap();
    let mut set = PointSet::new(ctx, vec![ctx.zero(), ctx.one()]).unwrap();
    for m in 0..12u64 {
        let (x, _) = extend_universal(&set, m).unwrap();
        set = set.with_element(x).unwrap();
    }
    probe_rules(&set, 12);
}
