use std::io::Cursor;

use quick_xml::events::{BytesDecl, BytesEnd, BytesStart, BytesText, Event};
use quick_xml::Writer;

use super::{Arc, LabeledPetriNet};

const PNML_CORE: &str = "http://www.pnml.org/version-2009/grammar/pnmlcoremodel";

struct Out(Writer<Cursor<Vec<u8>>>);

impl Out {
    fn event(&mut self, event: Event) {
        self.0.write_event(event).expect("writing to memory cannot fail");
    }

    fn start(&mut self, tag: &str, attrs: &[(&str, &str)]) {
        self.event(Event::Start(BytesStart::new(tag).with_attributes(attrs.iter().copied())));
    }

    fn empty(&mut self, tag: &str, attrs: &[(&str, &str)]) {
        self.event(Event::Empty(BytesStart::new(tag).with_attributes(attrs.iter().copied())));
    }

    fn end(&mut self, tag: &str) {
        self.event(Event::End(BytesEnd::new(tag)));
    }

    fn text_element(&mut self, wrapper: &str, text: &str) {
        self.start(wrapper, &[]);
        self.start("text", &[]);
        self.event(Event::Text(BytesText::new(text)));
        self.end("text");
        self.end(wrapper);
    }
}

/// Writes the net as PNML (core model, one page). The source place carries
/// the initial token and the final marking puts one token on the sink.
/// Silent transitions have no `<name>` and are flagged invisible in a
/// `toolspecific` element.
pub fn serialize_pnml(net: &LabeledPetriNet) -> Vec<u8> {
    let mut out = Out(Writer::new_with_indent(Cursor::new(Vec::new()), b' ', 2));
    out.event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)));
    out.start("pnml", &[]);
    out.start("net", &[("id", "net1"), ("type", PNML_CORE)]);
    out.text_element("name", "net1");
    out.start("page", &[("id", "n0")]);
    for (i, place) in net.places.iter().enumerate() {
        out.start("place", &[("id", &place.name)]);
        out.text_element("name", &place.name);
        if i == net.source.0 {
            out.text_element("initialMarking", "1");
        }
        out.end("place");
    }
    for transition in &net.transitions {
        out.start("transition", &[("id", &transition.name)]);
        match &transition.label {
            Some(label) => out.text_element("name", label),
            None => out.empty(
                "toolspecific",
                &[
                    ("tool", "ProM"),
                    ("version", "6.4"),
                    ("activity", "$invisible$"),
                    ("localNodeID", &transition.name),
                ],
            ),
        }
        out.end("transition");
    }
    for (i, arc) in net.arcs().into_iter().enumerate() {
        let (source, target) = match arc {
            Arc::Input(p, t) => (&net.place(p).name, &net.transition(t).name),
            Arc::Output(t, p) => (&net.transition(t).name, &net.place(p).name),
        };
        let id = format!("arc{i}");
        out.empty("arc", &[("id", &id), ("source", source), ("target", target)]);
    }
    out.end("page");
    out.start("finalmarkings", &[]);
    out.start("marking", &[]);
    out.start("place", &[("idref", &net.place(net.sink).name)]);
    out.start("text", &[]);
    out.event(Event::Text(BytesText::new("1")));
    out.end("text");
    out.end("place");
    out.end("marking");
    out.end("finalmarkings");
    out.end("net");
    out.end("pnml");
    let mut bytes = out.0.into_inner().into_inner();
    bytes.push(b'\n');
    bytes
}
