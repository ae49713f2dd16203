use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::board::{request_space, resolve, sense};

fn sq(s: &str) -> Square {
    s.parse().unwrap()
}

fn mv(s: &str) -> MoveRequest {
    s.parse().unwrap()
}

fn board(fen: &str) -> Board {
    Board::from_fen(fen).unwrap()
}

/// White's view after playing `own` and seeing no capture: Black to move next
/// is already expanded, so the set holds Black's 21 possible replies.
fn white_after_first_reply(own: &str) -> InfoSet {
    let mut s = InfoSet::new(Color::White);
    let (_, res) = resolve(&Board::initial(), mv(own)).unwrap();
    s.apply_own_move(mv(own), &res).unwrap();
    s.expand_opponent_turn(None).unwrap();
    s
}

#[test]
fn init_is_the_initial_singleton() {
    for c in Color::ALL {
        let s = InfoSet::new(c);
        assert_eq!(s.len(), 1);
        assert_eq!(s.boards()[0].to_fen(), crate::board::INITIAL_FEN);
        assert_eq!(s.owner(), c);
    }
}

#[test]
fn first_expansion_has_21_boards() {
    let mut s = InfoSet::new(Color::Black);
    s.expand_opponent_turn(None).unwrap();
    assert_eq!(s.len(), 21);
    // independent count: distinct successors over the request space
    let initial = Board::initial();
    let distinct: BTreeSet<Board> = request_space(&initial, Color::White)
        .unwrap()
        .into_iter()
        .map(|r| resolve(&initial, r).unwrap().0)
        .collect();
    assert_eq!(distinct.len(), 21);
    assert_eq!(s.boards().iter().copied().collect::<BTreeSet<_>>(), distinct);
    assert!(s.check_invariants().is_ok());
}

#[test]
fn expansion_respects_capture_notice() {
    // Black bishop b4 and knight c6 may take the White pawn on d4 / e5.
    let b = board("4k3/8/2n5/4P3/1b1P4/8/8/4K3 b - - 0 1");
    let mut s = InfoSet::from_boards(Color::White, [b], 100).unwrap();
    s.expand_opponent_turn(Some(CaptureNotice { square: sq("e5") })).unwrap();
    assert!(!s.is_empty());
    for b in s.boards() {
        assert_eq!(b.color_at(sq("e5")), Some(Color::Black));
    }
    let mut quiet = InfoSet::from_boards(Color::White, [b], 100).unwrap();
    quiet.expand_opponent_turn(None).unwrap();
    for b in quiet.boards() {
        assert_eq!(b.pieces(Color::White, PieceKind::Pawn).count_ones(), 2);
    }
}

#[test]
fn impossible_notice_is_inconsistent_and_leaves_set_alone() {
    let mut s = InfoSet::new(Color::Black);
    let before = s.clone();
    let err = s.expand_opponent_turn(Some(CaptureNotice { square: sq("e8") })).unwrap_err();
    assert!(matches!(err, InfoSetError::Inconsistent(_)));
    assert_eq!(s.boards(), before.boards());
}

#[test]
fn sense_filter_singleton_and_no_discrimination() {
    let mut s = InfoSet::new(Color::White);
    let r = sense(&Board::initial(), sq("d2")).unwrap();
    s.filter_sense(&r).unwrap();
    assert_eq!(s.len(), 1);

    let mut s = white_after_first_reply("0000");
    // Black moves cannot reach the b2..d4 block
    let truth = s.boards()[0];
    let r = sense(&truth, sq("c3")).unwrap();
    s.filter_sense(&r).unwrap();
    assert_eq!(s.len(), 21);
}

#[test]
fn sense_filter_after_e7e5() {
    let s = white_after_first_reply("0000");
    assert_eq!(s.len(), 21);
    let truth = resolve(&resolve(&Board::initial(), MoveRequest::Pass).unwrap().0, mv("e7e5")).unwrap().0;
    let r = sense(&truth, sq("e5")).unwrap();
    let expected: Vec<Board> = s
        .boards()
        .iter()
        .copied()
        .filter(|b| sense(b, sq("e5")).unwrap() == r)
        .collect();
    let mut filtered = s.clone();
    filtered.filter_sense(&r).unwrap();
    assert_eq!(filtered.boards(), expected.as_slice());
    assert_eq!(filtered.boards(), &[truth]);
}

#[test]
fn own_pass_keeps_size() {
    let mut s = white_after_first_reply("e2e4");
    let n = s.len();
    let res = resolve(&s.boards()[0], MoveRequest::Pass).unwrap().1;
    s.apply_own_move(MoveRequest::Pass, &res).unwrap();
    assert!(s.len() <= n);
    assert!(s.boards().iter().all(|b| b.side_to_move() == Color::Black));
}

#[test]
fn own_slider_landing_short_selects_the_blocker() {
    // Rook a1 sliding to a8 with a Black piece on a4, a6 or none.
    let boards = [
        board("4k3/8/8/8/n7/8/8/R3K3 w - - 0 1"),
        board("4k3/8/n7/8/8/8/8/R3K3 w - - 0 1"),
        board("4k3/8/8/8/8/8/8/R3K2n w - - 0 1"),
    ];
    let mut s = InfoSet::from_boards(Color::White, boards, 100).unwrap();
    let truth = boards[1];
    let (after, res) = resolve(&truth, mv("a1a8")).unwrap();
    assert_eq!(res.capture_square, Some(sq("a6")));
    s.apply_own_move(mv("a1a8"), &res).unwrap();
    assert_eq!(s.boards(), &[after]);
}

#[test]
fn failed_pawn_capture_selects_empty_diagonal() {
    let boards = [
        board("4k3/8/8/8/8/3n4/4P3/4K3 w - - 0 1"),
        board("4k3/8/8/8/8/8/4P3/4K2n w - - 0 1"),
    ];
    let mut s = InfoSet::from_boards(Color::White, boards, 100).unwrap();
    let (_, res) = resolve(&boards[1], mv("e2d3")).unwrap();
    assert!(res.taken.is_none());
    s.apply_own_move(mv("e2d3"), &res).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s.boards()[0].piece_at(sq("h1")), Some(Piece::new(Color::Black, PieceKind::Knight)));
}

#[test]
fn partitions_examples() {
    let s = InfoSet::new(Color::White);
    for c in SENSE_CENTERS {
        let p = s.partitions(c);
        assert_eq!(p.classes.len(), 1);
        assert_eq!(p.total(), 1);
    }
    let s = white_after_first_reply("0000");
    for c in SENSE_CENTERS {
        assert_eq!(s.partitions(c).total(), 21);
    }
    let pair = InfoSet::from_boards(
        Color::White,
        [board("n3k3/8/8/8/8/8/8/4K3 b - - 0 1"), board("4k3/8/8/8/8/8/8/4K3 b - - 0 1")],
        10,
    )
    .unwrap();
    let p = pair.partitions(sq("g2"));
    assert_eq!(p.classes.values().copied().collect::<Vec<_>>(), vec![2]);
}

#[test]
fn sense_scores_match_partitions() {
    let s = white_after_first_reply("e2e4");
    let scores = s.sense_scores();
    for (i, c) in SENSE_CENTERS.iter().enumerate() {
        assert_eq!(scores[i], s.partitions(*c).score(), "{c}");
        assert!(s.partitions(*c).expected_size() <= s.len() as f64);
    }
}

#[test]
fn min_expected_sense_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let single = InfoSet::new(Color::White);
    let picks: BTreeSet<Square> = (0..2000).map(|_| single.min_expected_sense(&mut rng)).collect();
    assert_eq!(picks.len(), 36);

    let pair = InfoSet::from_boards(
        Color::White,
        [board("4k3/8/8/3n4/8/8/8/4K3 w - - 0 1"), board("4k3/8/8/8/8/8/8/4K3 w - - 0 1")],
        10,
    )
    .unwrap();
    for _ in 0..200 {
        let c = pair.min_expected_sense(&mut rng);
        assert!(c.distance(sq("d5")) <= 1, "{c}");
    }

    let s = white_after_first_reply("0000");
    let best = (0..50).map(|_| s.min_expected_sense(&mut rng)).collect::<Vec<_>>();
    let brute: Vec<u128> = SENSE_CENTERS.iter().map(|&c| s.partitions(c).score()).collect();
    let min = *brute.iter().min().unwrap();
    for c in best {
        let i = SENSE_CENTERS.iter().position(|&x| x == c).unwrap();
        assert_eq!(brute[i], min);
    }
}

#[test]
fn successor_counts_on_singletons() {
    let s = InfoSet::new(Color::White);
    assert_eq!(s.successor_infoset_count(ActionKind::OwnSense, ObservationModel::Observations), Some(1));
    assert_eq!(s.successor_infoset_count(ActionKind::OwnMove, ObservationModel::Observations), Some(21));
    assert_eq!(s.successor_infoset_count(ActionKind::OwnMove, ObservationModel::GroundTruth), Some(21));

    let black = InfoSet::new(Color::Black);
    assert_eq!(black.successor_infoset_count(ActionKind::OpponentTurn, ObservationModel::GroundTruth), Some(21));
    // no first move captures, so Black cannot tell any of them apart
    assert_eq!(black.successor_infoset_count(ActionKind::OpponentTurn, ObservationModel::Observations), Some(1));
}

#[test]
fn sense_successors_count_distinct_contents() {
    // Two boards told apart by any center covering d5; the others leave both.
    let pair = InfoSet::from_boards(
        Color::White,
        [board("4k3/8/8/3n4/8/8/8/4K3 w - - 0 1"), board("4k3/8/8/8/8/8/8/4K3 w - - 0 1")],
        10,
    )
    .unwrap();
    assert_eq!(pair.successor_infoset_count(ActionKind::OwnSense, ObservationModel::Observations), Some(3));
}

#[test]
fn overflow_is_signaled_and_counts_become_unavailable() {
    let mut s = InfoSet::with_cap(Color::Black, 5);
    s.expand_opponent_turn(None).unwrap();
    assert_eq!(s.len(), 5);
    assert_eq!(s.overflow(), Some(OverflowSignal { halfmove: 1 }));
    assert_eq!(s.successor_infoset_count(ActionKind::OwnSense, ObservationModel::Observations), None);
}

#[test]
fn dump_is_sorted_by_key() {
    let s = white_after_first_reply("0000");
    let mut buf = Vec::new();
    s.write_dump(&mut buf).unwrap();
    let lines: Vec<&str> = std::str::from_utf8(&buf).unwrap().lines().collect();
    assert_eq!(lines.len(), 21);
    let keys: Vec<_> = lines.iter().map(|l| Board::from_fen(l).unwrap().key()).collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}
