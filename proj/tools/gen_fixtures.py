#!/usr/bin/env python3
"""Regenerate the synthetic fixtures under tests/fixtures.

corpus/  20 labeled claims (10 FAKE, 10 PRISTINE by construction), their image
         bundles, dataset evidence, a scripted model transcript, a mock search
         index and the engine config that ties them together.
filter/  10 records exercising each filter stage, plus the expected outcome.

Output is deterministic; rerun after changing this file and commit the result.
"""

import json
import random
import shutil
import struct
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
DIMS = {"objects": 2048, "faces": 512, "place": 2048, "semantic": 1000, "caption": 768}
NONZERO = 32


# ---------------------------------------------------------------- bundles

def sparse(rng, dim):
    v = [0.0] * dim
    for i in rng.sample(range(dim), NONZERO):
        v[i] = rng.choice((-1.0, 1.0))
    return v


def flip_one(rng, v):
    """Same scene, slightly different shot: cosine (NONZERO - 2) / NONZERO."""
    out = list(v)
    idx = [i for i, x in enumerate(out) if x != 0.0]
    i = rng.choice(idx)
    out[i] = -out[i]
    return out


def new_image(rng, image_id, caption, n_objects=2, n_faces=1, image_class="street"):
    return {
        "image_id": image_id,
        "objects": [sparse(rng, DIMS["objects"]) for _ in range(n_objects)],
        "faces": [sparse(rng, DIMS["faces"]) for _ in range(n_faces)],
        "place": sparse(rng, DIMS["place"]),
        "semantic": sparse(rng, DIMS["semantic"]),
        "caption_text": caption,
        "caption_emb": sparse(rng, DIMS["caption"]),
        "image_class": image_class,
    }


def near_copy(rng, b, image_id):
    return {
        "image_id": image_id,
        "objects": [flip_one(rng, v) for v in b["objects"]],
        "faces": [flip_one(rng, v) for v in b["faces"]],
        "place": flip_one(rng, b["place"]),
        "semantic": flip_one(rng, b["semantic"]),
        "caption_text": b["caption_text"],
        "caption_emb": flip_one(rng, b["caption_emb"]),
        "image_class": b["image_class"],
    }


def compact(v):
    return [int(x) for x in v]


def write_bundle(path, b, sidecar=False):
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {k: b[k] for k in ("image_id", "caption_text", "image_class")}
    if not sidecar:
        doc["objects"] = [compact(v) for v in b["objects"]]
        doc["faces"] = [compact(v) for v in b["faces"]]
        for k in ("place", "semantic"):
            doc[k] = compact(b[k])
        doc["caption_emb"] = compact(b["caption_emb"])
    else:
        blob = bytearray()

        def ref(rows, dim):
            r = {"offset": len(blob), "rows": len(rows), "dim": dim}
            for row in rows:
                blob.extend(struct.pack("<%df" % dim, *row))
            return r

        doc["objects"] = ref(b["objects"], DIMS["objects"])
        doc["faces"] = ref(b["faces"], DIMS["faces"])
        doc["place"] = ref([b["place"]], DIMS["place"])
        doc["semantic"] = ref([b["semantic"]], DIMS["semantic"])
        doc["caption_emb"] = ref([b["caption_emb"]], DIMS["caption"])
        bin_path = path.with_suffix(".bin")
        bin_path.write_bytes(bytes(blob))
        doc["sidecar"] = bin_path.name
    path.write_text(json.dumps(doc, separators=(",", ":")) + "\n")


# ---------------------------------------------------------------- graphs

def person(i, name, desc):
    return {"id": i, "name": name, "ent_type": "PERSON", "description": desc}


def org(i, name, desc):
    return {"id": i, "name": name, "ent_type": "ORG", "description": desc}


def event(i, name, desc):
    return {"id": i, "name": name, "ent_type": "EVENT", "description": desc}


def place(i, name, city, state, country):
    return {"id": i, "name": name, "ent_type": "LOCATION", "description": "a place in " + country,
            "location_data": {"city": city, "state": state, "country": country}}


def date(i, name, day, month, year):
    return {"id": i, "name": name, "ent_type": "DATE", "description": "the day it happened",
            "date_data": {"day": day, "month": month, "year": year}}


def edge(src, dst, action, desc):
    return {"src": src, "dst": dst, "action": action, "action_description": desc}


def text_of(g, lead=""):
    names = {n["id"]: n["name"] for n in g["nodes"]}
    sentences = ["%s %s %s." % (names[e["src"]], e["action"], names[e["dst"]]) for e in g["edges"]]
    return (lead + " " if lead else "") + " ".join(sentences)


def replace_node(g, old_id, new_node):
    nodes = [new_node if n["id"] == old_id else n for n in g["nodes"]]
    edges = [dict(e, src=new_node["id"] if e["src"] == old_id else e["src"],
                  dst=new_node["id"] if e["dst"] == old_id else e["dst"]) for e in g["edges"]]
    return {"nodes": nodes, "edges": edges}


# Twenty claim graphs with 1 to 4 edges; names never contain one another.
def claim_graphs():
    g = {}
    g["p01"] = {"nodes": [person("ada", "Ada Moreno", "a climate activist"),
                          event("march", "Climate march", "a street protest about climate policy"),
                          place("valencia", "Valencia", "Valencia", "Valencian Community", "Spain")],
                "edges": [edge("ada", "march", "led", "walked at the front of"),
                          edge("march", "valencia", "took place in", "happened in")]}
    g["p02"] = {"nodes": [org("firefighters", "Firefighters", "the regional fire brigade"),
                          event("wildfire", "Wildfire", "a forest fire"),
                          place("teruel", "Teruel", "Teruel", "Aragon", "Spain"),
                          date("aug12", "August 12 2022", 12, 8, 2022)],
                "edges": [edge("firefighters", "wildfire", "fought", "worked to put out"),
                          edge("wildfire", "teruel", "burned near", "spread close to"),
                          edge("wildfire", "aug12", "broke out on", "started on")]}
    g["p03"] = {"nodes": [person("lena", "Lena Ortiz", "a marathon runner"),
                          event("marathon", "City marathon", "an annual road race")],
                "edges": [edge("lena", "marathon", "won", "finished first in")]}
    g["p04"] = {"nodes": [org("union", "Dock workers union", "a labour union of port workers"),
                          event("strike", "Port strike", "a stoppage at the harbour"),
                          place("bilbao", "Bilbao", "Bilbao", "Basque Country", "Spain"),
                          date("mar3", "March 3 2021", 3, 3, 2021),
                          org("ministry", "Transport ministry", "the national transport ministry")],
                "edges": [edge("union", "strike", "called", "organised"),
                          edge("strike", "bilbao", "paralysed", "stopped activity in"),
                          edge("strike", "mar3", "began on", "started on"),
                          edge("ministry", "union", "met with", "held talks with")]}
    g["p05"] = {"nodes": [person("marta", "Marta Vidal", "a city mayor"),
                          event("bridge", "Bridge opening", "the inauguration of a new bridge"),
                          place("zaragoza", "Zaragoza", "Zaragoza", "Aragon", "Spain")],
                "edges": [edge("marta", "bridge", "inaugurated", "officially opened"),
                          edge("bridge", "zaragoza", "was held in", "happened in")]}
    g["p06"] = {"nodes": [org("students", "University students", "students of the local university"),
                          event("sitin", "Sit-in", "a peaceful occupation protest"),
                          place("salamanca", "Salamanca", "Salamanca", "Castile and Leon", "Spain"),
                          date("nov9", "November 9 2019", 9, 11, 2019)],
                "edges": [edge("students", "sitin", "staged", "organised"),
                          edge("sitin", "salamanca", "took place in", "happened in"),
                          edge("sitin", "nov9", "started on", "began on")]}
    g["p07"] = {"nodes": [person("jordi", "Jordi Puig", "a football coach"),
                          org("club", "Girona FC", "a football club"),
                          place("girona", "Girona", "Girona", "Catalonia", "Spain")],
                "edges": [edge("jordi", "club", "coached", "trained the players of"),
                          edge("club", "girona", "is based in", "has its home in")]}
    g["p08"] = {"nodes": [event("festival", "Harvest festival", "a yearly wine festival"),
                          place("logrono", "Logrono", "Logrono", "La Rioja", "Spain")],
                "edges": [edge("festival", "logrono", "filled", "crowded the streets of")]}
    g["p09"] = {"nodes": [person("pilar", "Pilar Rahola", "a journalist"),
                          event("rally", "Independence rally", "a political demonstration"),
                          place("plaza", "Plaza del Vi", "Girona", "Catalonia", "Spain")],
                "edges": [edge("pilar", "rally", "spoke at", "addressed the crowd at"),
                          edge("rally", "plaza", "gathered in", "assembled at")]}
    g["p10"] = {"nodes": [org("volunteers", "Volunteers", "local volunteers"),
                          event("cleanup", "Beach cleanup", "a collection of litter on the coast"),
                          place("cadiz", "Cadiz", "Cadiz", "Andalusia", "Spain"),
                          date("jun4", "June 4 2023", 4, 6, 2023)],
                "edges": [edge("volunteers", "cleanup", "joined", "took part in"),
                          edge("cleanup", "cadiz", "was held in", "happened in"),
                          edge("cleanup", "jun4", "took place on", "happened on")]}
    g["f01"] = {"nodes": [org("protesters", "Protesters", "anti-government demonstrators"),
                          event("riots", "Riots", "violent street clashes"),
                          org("police", "Police", "riot police"),
                          place("turkey", "Turkey", "UNK", "UNK", "Turkey"),
                          date("jun5", "June 5 2013", 5, 6, 2013)],
                "edges": [edge("protesters", "riots", "started", "began"),
                          edge("police", "protesters", "clashed with", "fought"),
                          edge("riots", "turkey", "took place in", "happened in"),
                          edge("riots", "jun5", "occurred on", "happened on")]}
    g["f02"] = {"nodes": [event("floods", "Floods", "severe flooding after heavy rain"),
                          place("lostwithiel", "Lostwithiel", "Lostwithiel", "Cornwall", "UK"),
                          org("residents", "Residents", "local people")],
                "edges": [edge("floods", "lostwithiel", "hit", "struck the area"),
                          edge("residents", "floods", "fled", "escaped from")]}
    g["f03"] = {"nodes": [event("quake", "Earthquake", "a strong earthquake"),
                          place("lorca", "Lorca", "Lorca", "Murcia", "Spain")],
                "edges": [edge("quake", "lorca", "struck", "shook")]}
    g["f04"] = {"nodes": [org("farmers", "Farmers", "agricultural workers"),
                          event("tractor", "Tractor protest", "a protest with tractors blocking roads"),
                          place("madrid", "Madrid", "Madrid", "Community of Madrid", "Spain"),
                          date("feb21", "February 21 2024", 21, 2, 2024)],
                "edges": [edge("farmers", "tractor", "organised", "set up"),
                          edge("tractor", "madrid", "blocked roads in", "stopped traffic in"),
                          edge("tractor", "feb21", "happened on", "took place on")]}
    g["f05"] = {"nodes": [event("storm", "Hailstorm", "a storm with large hail"),
                          date("jul7", "July 7 2020", 7, 7, 2020)],
                "edges": [edge("storm", "jul7", "hit on", "happened on")]}
    g["f06"] = {"nodes": [person("alien", "Captain Nova", "a cartoon astronaut"),
                          event("landing", "Moon landing", "a landing on the moon"),
                          place("seville", "Seville", "Seville", "Andalusia", "Spain")],
                "edges": [edge("alien", "landing", "staged", "faked"),
                          edge("landing", "seville", "was filmed in", "was recorded in")]}
    g["f07"] = {"nodes": [org("giants", "Giants", "mythical creatures"),
                          event("parade", "Giant parade", "a parade of giants")],
                "edges": [edge("giants", "parade", "marched in", "walked in")]}
    g["f08"] = {"nodes": [event("blackout", "Blackout", "a power cut"),
                          place("malaga", "Malaga", "Malaga", "Andalusia", "Spain"),
                          date("jan15", "January 15 2022", 15, 1, 2022)],
                "edges": [edge("blackout", "malaga", "hit", "affected"),
                          edge("blackout", "jan15", "happened on", "took place on")]}
    g["f09"] = {"nodes": [org("fans", "Fans", "football supporters"),
                          event("celebration", "Title celebration", "a celebration of a league title"),
                          place("cibeles", "Cibeles", "Madrid", "Community of Madrid", "Spain")],
                "edges": [edge("fans", "celebration", "joined", "took part in"),
                          edge("celebration", "cibeles", "filled", "crowded")]}
    g["f10"] = {"nodes": [event("eruption", "Volcanic eruption", "an eruption of a volcano"),
                          place("palma", "La Palma", "UNK", "Canary Islands", "Spain"),
                          org("evacuees", "Evacuees", "people forced to leave")],
                "edges": [edge("eruption", "palma", "devastated", "destroyed parts of"),
                          edge("evacuees", "eruption", "fled", "escaped from")]}
    return g


# ---------------------------------------------------------------- corpus

def build_corpus(rng):
    out = ROOT / "corpus"
    if out.exists():
        shutil.rmtree(out)
    (out / "bundles").mkdir(parents=True)
    graphs = claim_graphs()
    transcript = {"provider_id": "corpus-transcript", "max_retries": 3, "entries": []}
    pages = []
    manifest = []

    def script(task, subject, reply):
        transcript["entries"].append({"task": task, "subject": subject, "replies": [reply]})

    def bundle(name, b, sidecar=False):
        write_bundle(out / "bundles" / (name + ".json"), b, sidecar)
        return "bundles/" + name + ".json"

    def evidence(cid, text_items, visual_items):
        d = out / "evidence" / cid
        d.mkdir(parents=True)
        doc = {"text_evidence": text_items, "visual_evidence": visual_items}
        (d / "evidence.json").write_text(json.dumps(doc, indent=2) + "\n")
        return "evidence/" + cid

    def item(url, text, bundle_path=None):
        it = {"source_url": url, "contextual_text": text, "retrieved_at": "2024-01-01T00:00:00Z"}
        if bundle_path:
            it["bundle"] = "../../" + bundle_path
        return it

    for cid in sorted(graphs):
        g = graphs[cid]
        claim_text = text_of(g)
        script("build_graph", claim_text, g)
        label = "PRISTINE" if cid.startswith("p") else "FAKE"
        n = int(cid[1:])
        img = new_image(rng, cid + "-img", "photo for " + cid)
        claim_bundle = bundle(cid, img, sidecar=cid in ("p01", "f01"))
        rec = {"claim_id": cid, "text": claim_text, "bundle": claim_bundle, "label": label}
        same = near_copy(rng, img, cid + "-same")
        other = new_image(rng, cid + "-other", "unrelated photo")

        vt_text = text_of(g, "Reporters confirmed it:")
        te_text = text_of(g, "Agencies wrote:")

        if label == "PRISTINE" and n <= 4:
            # visual evidence agrees in text and image; text evidence agrees
            script("build_graph_conditional", vt_text, g)
            script("build_graph_conditional", te_text, g)
            rec["evidence_dir"] = evidence(cid, [item("https://elpais.com/%s/text" % cid, te_text)],
                                           [item("https://abc.es/%s/photo" % cid, vt_text, bundle(cid + "-same", same))])
        elif label == "PRISTINE" and n <= 6:
            # text evidence alone verifies
            script("build_graph_conditional", te_text, g)
            rec["evidence_dir"] = evidence(cid, [item("https://elmundo.es/%s/text" % cid, te_text)], [])
        elif label == "PRISTINE":
            # retrieval: found on the first try (p07, p08) or after one refinement (p09, p10)
            from_query = [n_["name"] for t in ("PERSON", "EVENT", "LOCATION", "DATE", "ORG", "OBJECT", "MISC")
                          for n_ in g["nodes"] if n_["ent_type"] == t]
            query = " ".join(from_query)
            token = cid + "story"
            script("build_graph_conditional", vt_text, g)
            script("build_graph_conditional", te_text, g)
            terms = [g["nodes"][0]["name"].split()[0].lower()]
            if n >= 9:
                script("refine_query", query, query + " " + token)
                terms.append(token)
                decoy_text = text_of(g, "Archive piece:")
                script("build_graph_conditional", decoy_text, g)
                pages.append({"url": "https://www.eldiario.es/%s/archive" % cid, "text": decoy_text,
                              "bundle": bundle(cid + "-other", other), "match_terms": [terms[0]]})
            pages.append({"url": "https://www.lavanguardia.com/%s/photo" % cid, "text": vt_text,
                          "bundle": bundle(cid + "-same", same), "match_terms": terms})
            pages.append({"url": "https://www.publico.es/%s/text" % cid, "text": te_text, "image_ids": [img["image_id"]]})
        elif n <= 3:
            # image out of context; the reverse-searched text puts the scene elsewhere
            loc = next(x for x in g["nodes"] if x["ent_type"] == "LOCATION")
            elsewhere = place(loc["id"] + "_x", ["Iran", "Aberdeen", "Quito"][n - 1], "UNK", "UNK",
                              ["Iran", "Scotland", "Ecuador"][n - 1])
            moved = replace_node(g, loc["id"], elsewhere)
            te_text = text_of(moved, "Agencies wrote:")
            script("build_graph_conditional", vt_text, g)
            script("build_graph_conditional", te_text, moved)
            rec["evidence_dir"] = evidence(cid, [item("https://elespanol.com/%s/text" % cid, te_text)],
                                           [item("https://abc.es/%s/photo" % cid, vt_text, bundle(cid + "-other", other))])
        elif n <= 5:
            # image and its text agree, but the reverse-searched text dates the event years earlier
            d = next(x for x in g["nodes"] if x["ent_type"] == "DATE")
            earlier = date(d["id"] + "_x", "May 2 2015", 2, 5, 2015)
            moved = replace_node(g, d["id"], earlier)
            te_text = text_of(moved, "Agencies wrote:")
            script("build_graph_conditional", vt_text, g)
            script("build_graph_conditional", te_text, moved)
            rec["evidence_dir"] = evidence(cid, [item("https://elpais.com/%s/text" % cid, te_text)],
                                           [item("https://abc.es/%s/photo" % cid, vt_text, bundle(cid + "-same", same))])
        elif n <= 7:
            # nothing anywhere
            rec["evidence_dir"] = evidence(cid, [], [])
        else:
            # retrieval never finds the image; every page carries another photo
            from_query = [n_["name"] for t in ("PERSON", "EVENT", "LOCATION", "DATE", "ORG", "OBJECT", "MISC")
                          for n_ in g["nodes"] if n_["ent_type"] == t]
            query = " ".join(from_query)
            term = g["nodes"][0]["name"].split()[0].lower()
            script("build_graph_conditional", vt_text, g)
            for k in range(1, 5):
                nxt = "%s %s coverage %d" % (query, term, k)
                script("refine_query", query, nxt)
                query = nxt
            pages.append({"url": "https://www.elmundo.es/%s/photo" % cid, "text": vt_text,
                          "bundle": bundle(cid + "-other", other), "match_terms": [term]})
            if n == 10:
                loc = next(x for x in g["nodes"] if x["ent_type"] == "LOCATION")
                moved = replace_node(g, loc["id"], place("hawaii", "Hawaii", "UNK", "Hawaii", "USA"))
                te_text = text_of(moved, "Agencies wrote:")
                script("build_graph_conditional", te_text, moved)
                pages.append({"url": "https://www.abc.es/%s/text" % cid, "text": te_text, "image_ids": [img["image_id"]]})
        manifest.append(rec)

    (out / "transcript.json").write_text(json.dumps(transcript, indent=1) + "\n")
    (out / "index.json").write_text(json.dumps({"retrieved_at": "2024-01-01T00:00:00Z", "pages": pages}, indent=1) + "\n")
    (out / "manifest.jsonl").write_text("".join(json.dumps(r) + "\n" for r in manifest))
    config = {"mock": {"llm_transcript": "transcript.json", "search_index": "index.json"},
              "retrieval": {"use_remiss_allowlist": True}}
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


# ---------------------------------------------------------------- filter

def build_filter(rng):
    out = ROOT / "filter"
    if out.exists():
        shutil.rmtree(out)
    (out / "bundles").mkdir(parents=True)
    # id, caption_alignment, image class, fakeness, expected stage (None = kept)
    rows = [
        ("keep-plain", 0.75, "street", 0.80, None),
        ("align-035", 0.35, "street", 0.90, "alignment"),
        ("align-040", 0.40, "street", 0.90, "alignment"),
        ("align-041", 0.41, "street", 0.90, None),
        ("class-website", 0.80, "website", 0.90, "visual"),
        ("class-internet", 0.80, "internet, screenshot", 0.90, "visual"),
        ("fake-045", 0.80, "street", 0.45, "fakeness"),
        ("fake-046", 0.80, "crowd", 0.46, None),
        ("broken-bundle", 0.80, "street", 0.90, "multimodal"),
        ("computed-align", None, None, None, None),
    ]
    lines = []
    expected = {}
    for cid, align, cls, fake, stage in rows:
        text = "Claim %s about a rally downtown" % cid
        caption = text if align is None else "a photo"
        b = new_image(rng, cid, caption, image_class=cls)
        if cls is None:
            del b["image_class"]
        if cid == "broken-bundle":
            b["place"] = b["place"][:100]
        write_bundle(out / "bundles" / (cid + ".json"), {**b, "image_class": b.get("image_class")})
        rec = {"claim_id": cid, "text": text, "bundle": "bundles/%s.json" % cid}
        if align is not None:
            rec["caption_alignment"] = align
        if fake is not None:
            rec["fakeness_score"] = fake
        lines.append(json.dumps(rec) + "\n")
        expected[cid] = stage or "kept"
    (out / "manifest.jsonl").write_text("".join(lines))
    (out / "expected.json").write_text(json.dumps(expected, indent=2) + "\n")


def main():
    build_corpus(random.Random(20240101))
    build_filter(random.Random(7))


if __name__ == "__main__":
    main()
