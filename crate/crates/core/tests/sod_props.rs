mod common;

use std::collections::BTreeSet;

use blowup_paths::sod::{
    mutate, mutation_orbit, recollement_of, twist_by_oc, MutationDir, RecollementLabel, SodLabel,
};
use common::{closed_form_orbit, label_at, line_position};
use proptest::prelude::*;

fn label() -> impl Strategy<Value = SodLabel> {
    (-40i64..=40).prop_map(label_at)
}

proptest! {
    #[test]
    fn mutations_are_mutually_inverse(s in label()) {
        prop_assert_eq!(mutate(mutate(s, MutationDir::Left), MutationDir::Right), s);
        prop_assert_eq!(mutate(mutate(s, MutationDir::Right), MutationDir::Left), s);
    }

    #[test]
    fn mutations_step_along_the_line(s in label()) {
        let p = line_position(&s);
        prop_assert_eq!(line_position(&mutate(s, MutationDir::Left)), p - 1);
        prop_assert_eq!(line_position(&mutate(s, MutationDir::Right)), p + 1);
    }

    #[test]
    fn twisting_commutes_with_mutation(s in label()) {
        for dir in [MutationDir::Left, MutationDir::Right] {
            prop_assert_eq!(twist_by_oc(mutate(s, dir)), mutate(twist_by_oc(s), dir));
        }
        prop_assert_eq!(line_position(&twist_by_oc(s)), line_position(&s) - 2);
        prop_assert_eq!(recollement_of(twist_by_oc(s)), twist_by_oc(recollement_of(s)));
    }

    #[test]
    fn orbit_matches_closed_form(s in label(), depth in 0usize..15) {
        let orbit: BTreeSet<SodLabel> = mutation_orbit(s, depth).into_iter().collect();
        prop_assert_eq!(orbit, closed_form_orbit(s, depth as i64));
    }
}

#[test]
fn recollements_of_the_two_orientations() {
    for k in -10..=10 {
        assert_eq!(recollement_of(SodLabel::exc_left(k)), RecollementLabel::L(k));
        assert_eq!(recollement_of(SodLabel::exc_right(k)), RecollementLabel::R(k));
        assert_eq!(twist_by_oc(RecollementLabel::L(k)), RecollementLabel::L(k - 1));
        assert_eq!(twist_by_oc(RecollementLabel::R(k)), RecollementLabel::R(k - 1));
    }
}

#[test]
fn orbit_of_the_w2_decomposition() {
    let orbit = mutation_orbit(SodLabel::exc_left(-1), 10);
    assert_eq!(orbit.len(), 21);
    assert!(orbit.contains(&SodLabel::exc_right(0)));
    assert!(orbit.contains(&SodLabel::exc_left(-6)));
    assert!(orbit.contains(&SodLabel::exc_right(4)));
    assert!(!orbit.contains(&SodLabel::exc_left(5)));
}

#[test]
fn rendering() {
    assert_eq!(SodLabel::exc_left(-1).render(), "⟨O_C(-1), D^b(Y)⟩");
    assert_eq!(SodLabel::exc_right(0).render(), "⟨D^b(Y), O_C⟩");
}
