use arbor_core::alignment::{align, align_with, is_fitting, AlignOptions};
use arbor_core::inductive_miner::discover;
use arbor_core::petri_net::{serialize_pnml, LabeledPetriNet};
use arbor_core::process_tree::{
    parse_ptml, serialize_ptml, InsertPosition, NewNode, Operator, ProcessTree, ShiftDirection,
};
use arbor_testkit::{arb_trace, arb_tree, exhaustive_alignment_cost, language_alignment_cost};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn simulation_agrees_with_enumeration(tree in arb_tree(4, 4, 7), trace in arb_trace(4, 6)) {
        let language = tree.enumerate_language(8).unwrap();
        prop_assert_eq!(tree.accepts(&trace).unwrap(), language.contains(&trace));
        for word in language.iter().take(20) {
            prop_assert!(tree.accepts(word).unwrap(), "{} rejects {:?}", tree, word);
        }
    }

    #[test]
    fn net_language_matches_tree_language(tree in arb_tree(4, 5, 8)) {
        let net = LabeledPetriNet::from_tree(&tree).unwrap();
        prop_assert!(net.is_workflow_net());
        prop_assert_eq!(net.visible_language(6, 5_000_000).unwrap(), tree.enumerate_language(6).unwrap());
    }

    #[test]
    fn ptml_round_trip(tree in arb_tree(6, 5, 10)) {
        prop_assert_eq!(parse_ptml(&serialize_ptml(&tree)).unwrap(), tree);
    }

    #[test]
    fn json_and_notation_round_trip(tree in arb_tree(6, 5, 10)) {
        let json = serde_json::to_string(&tree).unwrap();
        prop_assert_eq!(&serde_json::from_str::<ProcessTree>(&json).unwrap(), &tree);
        prop_assert_eq!(&tree.to_string().parse::<ProcessTree>().unwrap(), &tree);
    }

    #[test]
    fn pnml_is_well_formed(tree in arb_tree(5, 5, 10)) {
        let xml = String::from_utf8(serialize_pnml(&LabeledPetriNet::from_tree(&tree).unwrap())).unwrap();
        let mut reader = quick_xml::Reader::from_str(&xml);
        loop {
            match reader.read_event() {
                Ok(quick_xml::events::Event::Eof) => break,
                Ok(_) => {}
                Err(e) => prop_assert!(false, "malformed PNML: {e}"),
            }
        }
        prop_assert_eq!(xml.matches("<initialMarking>").count(), 1);
        prop_assert_eq!(xml.matches("<finalmarkings>").count(), 1);
    }

    #[test]
    fn alignment_cost_is_optimal(tree in arb_tree(5, 4, 7), trace in arb_trace(6, 6)) {
        let net = LabeledPetriNet::from_tree(&tree).unwrap();
        let alignment = align(&net, &trace).unwrap();
        prop_assert_eq!(alignment.cost, exhaustive_alignment_cost(&net, &trace));
        if let Some(expected) = language_alignment_cost(&tree, &trace, 12) {
            prop_assert_eq!(alignment.cost, expected);
        }
        let log: Vec<&str> = alignment.log_projection();
        prop_assert_eq!(log, trace.iter().map(String::as_str).collect::<Vec<_>>());
        let recomputed: u32 = alignment.moves.iter().map(|m| m.cost(&net)).sum();
        prop_assert_eq!(recomputed, alignment.cost);
    }

    #[test]
    fn heuristic_does_not_change_cost(tree in arb_tree(5, 4, 7), trace in arb_trace(6, 6)) {
        let net = LabeledPetriNet::from_tree(&tree).unwrap();
        let plain = AlignOptions { heuristic: false, ..AlignOptions::default() };
        let with = align(&net, &trace).unwrap().cost;
        let without = align_with(&net, &trace, &plain).unwrap().unwrap().cost;
        prop_assert_eq!(with, without);
    }

    #[test]
    fn discovered_model_fits_its_input(traces in prop::collection::btree_set(arb_trace(6, 8), 1..12)) {
        let tree = discover(&traces).unwrap();
        prop_assert!(tree.is_valid());
        for trace in &traces {
            prop_assert!(is_fitting(&tree, trace).unwrap(), "{} rejects {:?}", tree, trace);
            prop_assert!(tree.accepts(trace).unwrap());
        }
    }

    #[test]
    fn edits_survive_serialization(tree in arb_tree(4, 4, 8), pick in any::<prop::sample::Index>(), action in 0u8..6) {
        let paths = tree.paths();
        let target = pick.get(&paths).clone();
        let edited = match action {
            0 => tree.insert_node(&target, InsertPosition::Left, NewNode::Activity("x".into())),
            1 => tree.insert_node(&target, InsertPosition::Right, NewNode::Tau),
            2 => tree.insert_node(&target, InsertPosition::Below, NewNode::Operator(Operator::Sequence)),
            3 => tree.remove_subtree(&target),
            4 => tree.shift_subtree(&target, ShiftDirection::Left),
            _ => tree.set_label(&target, "y"),
        };
        if let Ok(edited) = edited {
            prop_assert_eq!(&parse_ptml(&serialize_ptml(&edited)).unwrap(), &edited);
            if action == 5 {
                prop_assert_eq!(edited.get(&target).unwrap().label(), Some("y"));
            }
        }
    }
}
