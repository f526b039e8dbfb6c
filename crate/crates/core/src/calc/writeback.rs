use super::{apply_rules, CalcError, CalcReport, OverridePin, RuleSet};
use crate::model::{leaf_mask, CellAddress, Cube};

/// True when every coordinate is a leaf, i.e. no enabled rule targets it.
pub fn input_eligible(leaves: &[Vec<bool>], address: &CellAddress) -> bool {
    address.ordinals().iter().zip(leaves).all(|(&m, leaf)| leaf[m])
}

/// Stores user-entered values on input cells and recalculates.
///
/// All cells are validated before any is written; a rejected batch leaves
/// the cube untouched.
pub fn write_back(
    cube: &mut Cube,
    rules: &RuleSet,
    cells: &[(CellAddress, f64)],
    source: &str,
) -> Result<CalcReport, CalcError> {
    let structure = cube.structure().clone();
    let leaves = leaf_mask(&structure, rules);
    let mut linear = Vec::with_capacity(cells.len());
    for (address, value) in cells {
        let index = structure.linear_index(address)?;
        if !value.is_finite() {
            return Err(CalcError::NonFinite { address: structure.describe(address) });
        }
        if !input_eligible(&leaves, address) {
            return Err(CalcError::RuleCovered { address: structure.describe(address) });
        }
        linear.push((index, *value));
    }
    for (index, value) in linear {
        cube.set_data(index, value, source);
    }
    Ok(apply_rules(cube, rules))
}

/// Pins a value. Takes effect as-is; the next calculation leaves it alone.
pub fn override_cell(cube: &mut Cube, pin: &OverridePin) -> Result<(), CalcError> {
    let structure = cube.structure().clone();
    let index = structure.linear_index(&pin.address)?;
    if !pin.value.is_finite() {
        return Err(CalcError::NonFinite { address: structure.describe(&pin.address) });
    }
    cube.pin(index, pin.value, &pin.source);
    Ok(())
}

/// Releases a pin so the next calculation takes the cell back. Returns
/// false (and changes nothing) when the cell was not pinned.
pub fn clear_override(cube: &mut Cube, address: &CellAddress) -> Result<bool, CalcError> {
    let index = cube.structure().linear_index(address)?;
    Ok(cube.unpin(index))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::calc::RuleDef;
    use crate::model::{CellSource, DimensionDef, ModelStructure};
    use crate::value::CellValue;

    fn setup() -> (Arc<ModelStructure>, RuleSet, Cube) {
        let s = Arc::new(
            ModelStructure::build(
                "t",
                &[
                    DimensionDef::flat("ACCT", &["Sales", "Disc", "Net"]),
                    DimensionDef::flat("SCEN", &["Act", "Bud"]),
                ],
            )
            .unwrap(),
        );
        let rules = RuleSet::build(&s, &[RuleDef::new("net", "ACCT", "Net", "{Sales} - {Disc}")]).unwrap();
        let cube = Cube::new(s.clone());
        (s, rules, cube)
    }

    fn addr(s: &ModelStructure, a: &str, sc: &str) -> CellAddress {
        s.address_from_names(&[("ACCT", a), ("SCEN", sc)]).unwrap()
    }

    #[test]
    fn write_then_recalc() {
        let (s, rules, mut cube) = setup();
        write_back(&mut cube, &rules, &[(addr(&s, "Sales", "Bud"), 5000.0), (addr(&s, "Disc", "Bud"), 2.5)], "u1")
            .unwrap();
        assert_eq!(cube.value_at(&addr(&s, "Net", "Bud")).unwrap(), CellValue::Number(4997.5));
        let before = cube.values().to_vec();
        write_back(&mut cube, &rules, &[(addr(&s, "Sales", "Bud"), 5000.0)], "u1").unwrap();
        assert!(before.iter().zip(cube.values()).all(|(a, b)| a.bit_eq(*b)));
    }

    #[test]
    fn guards() {
        let (s, rules, mut cube) = setup();
        let err = write_back(&mut cube, &rules, &[(addr(&s, "Net", "Bud"), 1.0)], "u").unwrap_err();
        assert!(err.to_string().contains("rule-covered cell"), "{err}");
        let err = write_back(&mut cube, &rules, &[(addr(&s, "Sales", "Bud"), f64::NAN)], "u").unwrap_err();
        assert!(matches!(err, CalcError::NonFinite { .. }));
        // Batch is atomic.
        let _ = write_back(
            &mut cube,
            &rules,
            &[(addr(&s, "Sales", "Act"), 3.0), (addr(&s, "Net", "Act"), 1.0)],
            "u",
        );
        assert_eq!(cube.count_where(|src| src != CellSource::Empty), 0);
    }

    #[test]
    fn pin_clear_cycle() {
        let (s, rules, mut cube) = setup();
        write_back(&mut cube, &rules, &[(addr(&s, "Sales", "Act"), 10.0)], "u").unwrap();
        let net = addr(&s, "Net", "Act");
        override_cell(&mut cube, &OverridePin { address: net.clone(), value: 1.0, source: "p".into() }).unwrap();
        for _ in 0..3 {
            apply_rules(&mut cube, &rules);
            assert!(cube.value_at(&net).unwrap().bit_eq(CellValue::Number(1.0)));
        }
        assert!(clear_override(&mut cube, &net).unwrap());
        assert!(!clear_override(&mut cube, &net).unwrap());
        apply_rules(&mut cube, &rules);
        assert_eq!(cube.value_at(&net).unwrap(), CellValue::Number(10.0));
    }
}
