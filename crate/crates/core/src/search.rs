//! One-dimensional minimisation helpers shared by the bound optimisers.

/// 1/phi
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a local minimum of `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `xtol`. Returns the best point
/// evaluated, including the bracket ends, so a minimum sitting on the
/// boundary is found too.
pub(crate) fn golden_section<F, E>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (mut a, mut b) = (lo, hi);
    let mut best = (a, f(a)?);
    let fb = f(b)?;
    if fb < best.1 {
        best = (b, fb);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    for cand in [(c, fc), (d, fd)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}

/// Evaluate `f` on `grid`, then refine around the best grid point with
/// golden-section search between its neighbours.
pub(crate) fn grid_then_golden<F, E>(mut f: F, grid: &[f64], xtol: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    assert!(!grid.is_empty());
    let mut values = Vec::with_capacity(grid.len());
    for &x in grid {
        values.push(f(x)?);
    }
    let k = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let refined = if hi > lo {
        golden_section(&mut f, lo, hi, xtol)?
    } else {
        (grid[k], values[k])
    };
    Ok(if refined.1 <= values[k] {
        refined
    } else {
        (grid[k], values[k])
    })
}
