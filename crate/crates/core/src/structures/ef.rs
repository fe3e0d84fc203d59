use super::Typed;

/// Plays the `rank`-round Ehrenfeucht–Fraïssé game directly: Spoiler picks
/// a structure and an element, Duplicator answers in the other structure, and
/// Duplicator must keep the atomic signatures equal. Exponential; intended for
/// small instances and as an independent check of [`super::ef_equivalent`].
pub fn ef_game<A: Typed + ?Sized, B: Typed + ?Sized>(s1: &A, t1: &[usize], s2: &B, t2: &[usize], rank: usize) -> bool {
    assert_eq!(t1.len(), t2.len(), "tuples of different arity");
    play(s1, &mut t1.to_vec(), s2, &mut t2.to_vec(), rank)
}

fn same_atomic<A: Typed + ?Sized, B: Typed + ?Sized>(s1: &A, t1: &[usize], s2: &B, t2: &[usize]) -> bool {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    s1.atomic_signature(t1, &mut a);
    s2.atomic_signature(t2, &mut b);
    a == b
}

fn play<A: Typed + ?Sized, B: Typed + ?Sized>(s1: &A, t1: &mut Vec<usize>, s2: &B, t2: &mut Vec<usize>, rank: usize) -> bool {
    if !same_atomic(s1, t1, s2, t2) {
        return false;
    }
    if rank == 0 {
        return true;
    }
    // Spoiler in the first structure
    for p in 1..=s1.size() {
        t1.push(p);
        let answered = (1..=s2.size()).any(|q| {
            t2.push(q);
            let ok = play(s1, t1, s2, t2, rank - 1);
            t2.pop();
            ok
        });
        t1.pop();
        if !answered {
            return false;
        }
    }
    // Spoiler in the second structure
    for q in 1..=s2.size() {
        t2.push(q);
        let answered = (1..=s1.size()).any(|p| {
            t1.push(p);
            let ok = play(s1, t1, s2, t2, rank - 1);
            t1.pop();
            ok
        });
        t2.pop();
        if !answered {
            return false;
        }
    }
    true
}
