use super::{AdversaryView, LeakageError};

/// Recovers the two z-values taken by the peer's data when its rounding
/// errors fall into exactly two classes.
///
/// With `J_a`, `J_b` the index classes of equal peer error,
///
/// ```text
/// a sum_{J_a} z_j^own   + b sum_{J_b} z_j^own   = (n-1) r
/// a sum_{J_a} eps_j^own + b sum_{J_b} eps_j^own = received cross sum
/// ```
///
/// `a` is the value on the class containing the first sample.
pub fn two_point_attack(view: &AdversaryView) -> Result<(f64, f64), LeakageError> {
    let rec = view.record()?;
    let first = rec.eps_other[0].to_bits();
    let mut other_bits = None;
    let mut in_a = Vec::with_capacity(view.n());
    for e in &rec.eps_other {
        let bits = e.to_bits();
        if bits == first {
            in_a.push(true);
            continue;
        }
        match other_bits {
            None => other_bits = Some(bits),
            Some(b) if b == bits => {}
            Some(_) => {
                let mut distinct: Vec<u64> = rec.eps_other.iter().map(|x| x.to_bits()).collect();
                distinct.sort_unstable();
                distinct.dedup();
                return Err(LeakageError::NotTwoPoint(distinct.len()));
            }
        }
        in_a.push(false);
    }
    if other_bits.is_none() {
        return Err(LeakageError::Indistinguishable);
    }

    let split = |v: &[f64]| {
        v.iter().zip(&in_a).fold(
            (0.0, 0.0),
            |(sa, sb), (&x, &a)| if a { (sa + x, sb) } else { (sa, sb + x) },
        )
    };
    let (za, zb) = split(&view.z_own);
    let (ea, eb) = split(&rec.eps_own);
    let c1 = (view.n() - 1) as f64 * view.r;
    let c2 = rec.cross_sum_received;

    let det = za * eb - zb * ea;
    let scale = (za.abs() + zb.abs()) * (ea.abs() + eb.abs());
    if scale == 0.0 || det.abs() <= 1e-12 * scale {
        return Err(LeakageError::DependentEquations);
    }
    Ok(((c1 * eb - zb * c2) / det, (za * c2 - c1 * ea) / det))
}
