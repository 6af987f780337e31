#!/usr/bin/env python3
"""Regenerates the offline mini fixture: corpus, questions and scripted model rules.

The rules are keyed on marker phrases from the bundled prompt templates, so
editing those templates may require rerunning this script.
"""
import json
import pathlib

HERE = pathlib.Path(__file__).resolve().parent

# Marker phrases, one per prompt template.
DETECT = {
    "syntactic": "under any of the 18 phenomena",
    "general": "three RAW metric values",
    "semantic": "Semantically ambiguous lacks sufficient context",
}
CLARIFY = {
    "syntactic": "different structural reading",
    "general": "broader, faithful variants",
    "semantic": "distinct clarified questions, each resolving",
}
DECOMPOSE = "atomic, single-hop sub-questions"
SHORT = "return the shortest exact span"
SHORTEN = "The short answer below is too long"
LONG = "Combine two validated short answers"
ALIGN = "meticulous dataset reviewer"

PASSAGES = [
    ("batman-1989", "Batman (1989 film)",
     "Batman is a 1989 superhero film directed by Tim Burton. Jack Nicholson played the Joker opposite Michael Keaton as Batman."),
    ("dark-knight", "The Dark Knight",
     "The Dark Knight is a 2008 superhero film directed by Christopher Nolan. Heath Ledger played the Joker and received a posthumous Academy Award."),
    ("moby-dick", "Moby-Dick",
     "Moby-Dick is an 1851 novel by Herman Melville. Captain Ahab, who lost his leg to the white whale and walks on a whale-bone leg, commands the whaling ship Pequod."),
    ("treasure-island", "Treasure Island",
     "Treasure Island is a novel by Robert Louis Stevenson. The one-legged pirate Long John Silver sails as ship's cook aboard the schooner Hispaniola."),
    ("reykjavik", "Reykjavik",
     "Reykjavik is the capital and largest city of Iceland. The city itself has a population of about 131,000 people."),
    ("capital-region", "Capital Region (Iceland)",
     "The Capital Region of Iceland is the metropolitan area around Reykjavik. The whole capital region has a population of about 233,000 people."),
    ("gold", "Gold",
     "Gold is a chemical element with the chemical symbol Au and atomic number 79. It is a bright, dense and soft metal."),
    ("bank-river", "River bank",
     "A bank is the land alongside a river. River banks are shaped by erosion and deposition over long periods."),
    ("narnia-2005", "The Lion, the Witch and the Wardrobe (film)",
     "The Lion, the Witch and the Wardrobe is a 2005 fantasy film based on the Narnia books. Liam Neeson voiced the lion Aslan."),
    ("narnia-2008", "Prince Caspian (film)",
     "Prince Caspian is a 2008 fantasy film and the second Narnia film. Liam Neeson returned as the voice of the lion Aslan."),
    ("wc-1998", "1998 FIFA World Cup final",
     "The 1998 FIFA World Cup final was played at the Stade de France. France won the World Cup final 3-0 against Brazil."),
    ("wc-1998-brazil", "Brazil at the 1998 FIFA World Cup",
     "Brazil reached the 1998 World Cup final as defending champions and finished as runner-up after losing to France."),
    ("georgia-country", "Georgia (country)",
     "Georgia is a country in the Caucasus between the Black Sea and the Caspian Sea. Its official language is Georgian, a Kartvelian language."),
    ("georgia-state", "Georgia (U.S. state)",
     "Georgia is a state in the Southeastern United States. English is the most widely spoken language in the state of Georgia."),
    ("mercury-planet", "Mercury (planet)",
     "Mercury is the smallest planet in the Solar System and the nearest planet to the Sun in its orbital path."),
    ("mercury-element", "Mercury (element)",
     "Mercury is a chemical element with the symbol Hg. It is a heavy metal that is liquid at room temperature."),
    ("telescope-hill", "Hilltop observatory",
     "The hilltop observatory near the town houses a refracting telescope donated by a local astronomer in 1902."),
    ("eiffel", "Eiffel Tower",
     "The Eiffel Tower is a wrought-iron lattice tower in Paris. It opened in 1889 for the World's Fair."),
    ("nile", "Nile",
     "The Nile is a major river in northeastern Africa that flows north into the Mediterranean Sea."),
    ("amazon", "Amazon River",
     "The Amazon River in South America is the largest river by discharge volume of water in the world."),
    ("everest", "Mount Everest",
     "Mount Everest is the highest mountain above sea level, located in the Himalayas on the border of Nepal and China."),
    ("python-lang", "Python (programming language)",
     "Python is a high-level programming language created by Guido van Rossum and first released in 1991."),
    ("python-snake", "Pythonidae",
     "Pythons are a family of nonvenomous snakes found in Africa, Asia and Australia."),
    ("jaguar-car", "Jaguar Cars",
     "Jaguar is a British luxury car brand founded in 1922 as the Swallow Sidecar Company."),
    ("jaguar-cat", "Jaguar",
     "The jaguar is a large cat species native to the Americas and the third largest cat after the tiger and the lion."),
    ("shakespeare", "William Shakespeare",
     "William Shakespeare was an English playwright and poet, widely regarded as the greatest writer in the English language."),
    ("hamlet", "Hamlet",
     "Hamlet is a tragedy written by William Shakespeare set in Denmark, about Prince Hamlet and his revenge."),
    ("tokyo", "Tokyo",
     "Tokyo is the capital of Japan and one of the most populous metropolitan areas in the world."),
    ("mars", "Mars",
     "Mars is the fourth planet from the Sun, often called the Red Planet because of iron oxide on its surface."),
    ("venus", "Venus",
     "Venus is the second planet from the Sun and the hottest planet in the Solar System."),
    ("oxygen", "Oxygen",
     "Oxygen is a chemical element with symbol O and atomic number 8, essential for respiration."),
    ("beethoven", "Ludwig van Beethoven",
     "Ludwig van Beethoven was a German composer who wrote nine symphonies, including the Ninth with its choral finale."),
    ("mona-lisa", "Mona Lisa",
     "The Mona Lisa is a portrait painting by Leonardo da Vinci, held at the Louvre in Paris."),
    ("great-wall", "Great Wall of China",
     "The Great Wall of China is a series of fortifications built across the historical northern borders of China."),
    ("olympics-2012", "2012 Summer Olympics",
     "The 2012 Summer Olympics were held in London, which became the first city to host the modern Games three times."),
    ("apollo-11", "Apollo 11",
     "Apollo 11 was the 1969 spaceflight in which Neil Armstrong and Buzz Aldrin became the first people to walk on the Moon."),
    ("penicillin", "Penicillin",
     "Penicillin was discovered in 1928 by Alexander Fleming at St Mary's Hospital in London."),
    ("titanic-ship", "RMS Titanic",
     "RMS Titanic was a British passenger liner that sank in the North Atlantic Ocean in April 1912 after striking an iceberg."),
    ("bank-finance", "Bank",
     "A bank is a financial institution that accepts deposits from the public and creates credit."),
    ("chess", "Chess",
     "Chess is a board game for two players played on a checkered board with 64 squares."),
]
assert len(PASSAGES) == 40

# Each question: id, text, hops, ambiguity types detected unanimously, and per
# type the clarified questions with their sub-questions and short answers.
QUESTIONS = [
    {"id": "q01", "question": "Who played the Joker in the Batman film?", "hops": 2,
     "types": {"semantic": [
         ("Who played the Joker in the 1989 Batman film directed by Tim Burton?",
          ["Which Batman film was directed by Tim Burton in 1989?", "Who played the Joker in Batman 1989?"],
          "Jack Nicholson"),
         ("Who played the Joker in the 2008 Batman film The Dark Knight?",
          ["Which Batman film was released in 2008?", "Who played the Joker in The Dark Knight?"],
          "Heath Ledger")]},
     "long": "The Joker was played by Jack Nicholson in Tim Burton's 1989 Batman and by Heath Ledger in the 2008 film The Dark Knight."},
    {"id": "q02", "question": "What was the ship of the captain with the wooden leg called?", "hops": 3,
     "types": {"syntactic": [
         ("What was the ship commanded by Captain Ahab, the captain with a whale-bone leg in Moby-Dick, called?",
          ["Which captain in Moby-Dick has a whale-bone leg?", "Which whaling ship does Captain Ahab command?"],
          "Pequod"),
         ("What was the ship that Long John Silver, the one-legged pirate of Treasure Island, sailed on called?",
          ["Who is the one-legged pirate in Treasure Island?", "Which schooner does Long John Silver sail aboard?"],
          "Hispaniola")]},
     "long": "Captain Ahab, the captain with the whale-bone leg, commands the Pequod, while the one-legged Long John Silver sails aboard the Hispaniola."},
    {"id": "q03", "question": "What was the population of Reykjavik on 1 January 2019 according to the 2019 census release?", "hops": 2,
     "types": {"general": [
         ("What is the population of the city of Reykjavik?",
          ["What is Reykjavik?", "What is the population of the city of Reykjavik?"],
          "about 131,000"),
         ("What is the population of the capital region around Reykjavik?",
          ["Which region surrounds Reykjavik?", "What is the population of the Capital Region of Iceland?"],
          "about 233,000")]},
     "long": "The city of Reykjavik has about 131,000 people, and the wider capital region around it has about 233,000."},
    {"id": "q04", "question": "What is the chemical symbol for gold?", "hops": 1, "types": {}},
    {"id": "q05", "question": "When was the bank on the river founded?", "hops": 2, "types": {},
     "split": "semantic"},
    {"id": "q06", "question": "Who voiced the lion in the Narnia films?", "hops": 2,
     "types": {"semantic": [
         ("Who voiced Aslan in the 2005 film The Lion, the Witch and the Wardrobe?",
          ["Which lion appears in the 2005 Narnia film?", "Who voiced Aslan in the 2005 Narnia film?"],
          "Liam Neeson"),
         ("Who voiced Aslan in the 2008 film Prince Caspian?",
          ["Which Narnia film was released in 2008?", "Who voiced Aslan in Prince Caspian?"],
          "Liam Neeson")]}},
    {"id": "q07", "question": "Which team won the 1998 FIFA World Cup final held on 12 July 1998 at the Stade de France?", "hops": 2,
     "types": {"general": [
         ("Which team won the 1998 FIFA World Cup?",
          ["Where was the 1998 World Cup final played?", "Which team won the 1998 World Cup final?"],
          "France"),
         ("Which team was runner-up at the 1998 FIFA World Cup?",
          ["Which teams reached the 1998 World Cup final?", "Which team finished as runner-up in 1998?"],
          "Brazil")]},
     "long": "France won the 1998 World Cup final, beating runner-up Brazil.",
     "judge_veto": True},
    {"id": "q08", "question": "What language is spoken in Georgia?", "hops": 2,
     "types": {
         "semantic": [
             ("What language is spoken in the country of Georgia in the Caucasus?",
              ["Where is the country of Georgia?", "What is the official language of the country of Georgia?"],
              "Georgian"),
             ("What language is spoken in the U.S. state of Georgia?",
              ["Where is the state of Georgia?", "What language is most widely spoken in the state of Georgia?"],
              "English")],
         "syntactic": [
             ("What language is spoken by most people who live in Georgia?",
              ["Who lives in Georgia?", "What do most people in Georgia speak?"],
              None),
             ("What language is spoken officially by the government in Georgia?",
              ["What government does Georgia have?", "What language does the Georgian government use?"],
              None)]},
     "long": "In the country of Georgia in the Caucasus the language is Georgian, while in the U.S. state of Georgia it is English."},
    {"id": "q09", "question": "What is Mercury?", "hops": 1,
     "types": {"semantic": [
         ("What kind of celestial body is the planet Mercury?",
          ["Which planet is named Mercury?", "What kind of planet is Mercury in the Solar System?"],
          "the smallest planet in the Solar System and the nearest planet to the Sun in its orbital path"),
         ("What kind of substance is the chemical element mercury?",
          ["Which chemical element is mercury?", "What kind of metal is mercury at room temperature?"],
          "a heavy metal that is liquid at room temperature")]},
     "shorten": {"the smallest planet in the Solar System and the nearest planet to the Sun in its orbital path":
                 "the smallest planet in the Solar System"},
     "long": "Mercury is the smallest planet in the Solar System, and mercury is also a heavy metal that is liquid at room temperature."},
    {"id": "q10", "question": "Who owned the telescope on the hill near the observatory?", "hops": 2, "types": {},
     "malformed": "syntactic"},
]


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def write_json(path, value):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(value, f, indent=2, ensure_ascii=False)
        f.write("\n")


def forge_rules():
    detector = []
    generator = []
    judge = []
    for q in QUESTIONS:
        text = q["question"]
        for t in q["types"]:
            detector.append({"contains": [text, DETECT[t]],
                             "response": {"is_ambiguous": "Y", **({"categories": [1]} if t == "syntactic" else {})}})
        for t, items in q["types"].items():
            generator.append({"contains": [text, CLARIFY[t]],
                              "response": {"clarified_queries": [cq for cq, _, _ in items]}})
            for cq, subs, answer in items:
                generator.append({"contains": [cq, DECOMPOSE], "response": "\n".join("* " + s for s in subs)})
                if answer is not None:
                    generator.append({"contains": [cq, answer, SHORT], "response": {"short_answer": answer}})
        for long_span, short in q.get("shorten", {}).items():
            generator.append({"contains": [long_span, SHORTEN], "response": {"short_answer": short}})
        if "long" in q:
            generator.append({"contains": [text, LONG], "response": {"long_answer": q["long"]}})
    detector += [
        {"contains": "is_ambiguous", "response": {"is_ambiguous": "N"}},
    ]
    generator += [
        {"contains": SHORT, "response": {"short_answer": ""}},
    ]
    judge += [{"contains": ALIGN, "response": {"aligned": "Y"}}]

    # Per-model overrides placed before the shared rules.
    split = [{"contains": [q["question"], DETECT[q["split"]]], "response": {"is_ambiguous": "Y"}}
             for q in QUESTIONS if "split" in q]
    malformed = [{"contains": [q["question"], DETECT[q["malformed"]]], "response": "I would say it might be."}
                 for q in QUESTIONS if "malformed" in q]
    unanimous_malformed = [{"contains": [q["question"], DETECT[q["malformed"]]], "response": {"is_ambiguous": "Y"}}
                           for q in QUESTIONS if "malformed" in q]
    veto = [{"contains": [q["question"], ALIGN], "response": {"aligned": "N"}}
            for q in QUESTIONS if q.get("judge_veto")]
    return {
        "detector_rules.json": detector,
        "generator_rules.json": generator,
        "judge_rules.json": judge,
        # Detectors 1-3 see the split question as ambiguous, detector 4 does not.
        "detector_split.json": split,
        # Detector 2 answers the malformed question in prose; the rest say Y.
        "detector_malformed.json": malformed,
        "detector_agree.json": unanimous_malformed,
        "judge_veto.json": veto,
    }


def forge_config():
    def scripted(model, files):
        return {"kind": "scripted", "model": model, "script_file": files}
    return {
        "models": {
            "detectors": [
                scripted("detector-a", ["rules/detector_split.json", "rules/detector_agree.json", "rules/detector_rules.json"]),
                scripted("detector-b", ["rules/detector_split.json", "rules/detector_malformed.json", "rules/detector_rules.json"]),
                scripted("detector-c", ["rules/detector_split.json", "rules/detector_agree.json", "rules/detector_rules.json"]),
                scripted("detector-d", ["rules/detector_agree.json", "rules/detector_rules.json"]),
            ],
            "generator": scripted("generator-a", "rules/generator_rules.json"),
            "judges": [
                scripted("judge-a", "rules/judge_rules.json"),
                scripted("judge-b", "rules/judge_rules.json"),
                scripted("judge-c", ["rules/judge_veto.json", "rules/judge_rules.json"]),
            ],
        },
        "retrieval": {"top_k": 10, "embedder": "stub", "stub_dim": 64},
        "workers": 4,
        "paths": {"questions": "questions.jsonl", "corpus": "corpus.jsonl"},
    }


ANALYZE = "expert at analyzing query ambiguity"
PLAN_CLARIFY = "two specific, actionable, and faithful"
REACT = "following ReAct"
NO_RETRIEVAL = "Answer the question below accurately and concisely"
NAIVE_RAG = "Answer the question using the retrieved passages below"
DIVERSIFY = "concrete, distinct interpretations"
VERIFY = "verifying retrieved evidence"
DIVA_ANSWER = "Cover every interpretation listed"
JUDGE = "impartial judge of long-form answers"


def run_rules(instances):
    """Agent rules built from the forged instances: the agent plans, searches
    each clarified question once and answers with the reference long answer.
    The baselines only recover the first interpretation."""
    agent = []
    for inst in instances:
        text = inst["question"]
        cqs = inst["clarified_questions"]
        shorts = [a["text"] for a in inst["short_answers"]]
        agent.append({"contains": [text, ANALYZE], "response": {
            "reasoning": "the query admits more than one reading",
            "is_ambiguous": True,
            "ambiguity_type": inst["ambiguity_type"],
            "ambiguous_aspects": ["referent"],
            "clarification_needed": "which reading is meant"}})
        agent.append({"contains": [text, PLAN_CLARIFY], "response": {
            "reasoning": "each version fixes one reading",
            "clarified_query1": cqs[0],
            "clarified_query2": cqs[1]}})
        agent.append({"contains": [text, REACT], "responses": [
            f"THOUGHT: I should look up the first reading.\nACTION: SEARCH[{cqs[0]}]",
            f"THOUGHT: Now the second reading.\nACTION: SEARCH[{cqs[1]}]",
            f"THOUGHT: Both readings are covered.\nACTION: ANSWER[{inst['long_answer']}]"]})
        first = f"{shorts[0]}."
        agent.append({"contains": [text, NO_RETRIEVAL], "response": first})
        agent.append({"contains": [text, NAIVE_RAG], "response": first})
        agent.append({"contains": [text, DIVERSIFY], "response": {"interpretations": cqs}})
        agent.append({"contains": [text, DIVA_ANSWER], "response": f"{shorts[0]} or {shorts[1]}."})
    agent += [
        {"contains": ANALYZE, "response": {
            "reasoning": "clear", "is_ambiguous": False, "ambiguity_type": "none",
            "ambiguous_aspects": [], "clarification_needed": ""}},
        {"contains": REACT, "response": "THOUGHT: I cannot tell.\nACTION: ANSWER[I do not know.]"},
        {"contains": VERIFY, "response": {"label": "useful"}},
        {"contains": "Answer:", "response": "I do not know."},
    ]
    judge = [{"contains": JUDGE, "response": {
        "relevance": 4, "faithfulness": 4, "informativeness": 3, "correctness": 4}}]
    return {"agent_rules.json": agent, "eval_judge_rules.json": judge}


def run_config():
    return {
        "models": {
            "agent": {"kind": "scripted", "model": "agent-a", "script_file": "rules/agent_rules.json"},
            "eval_judge": {"kind": "scripted", "model": "eval-judge-a", "script_file": "rules/eval_judge_rules.json"},
        },
        "retrieval": {"top_k": 10, "embedder": "stub", "stub_dim": 64},
        "agent": {"max_iterations": 5, "max_searches": 5},
        "diva": {"interpretations": 2},
        "workers": 4,
        "paths": {"dataset": "mini.jsonl", "corpus": "corpus.jsonl"},
    }


def main():
    write_jsonl(HERE / "corpus.jsonl", [{"doc_id": d, "title": t, "text": x} for d, t, x in PASSAGES])
    write_jsonl(HERE / "questions.jsonl",
                [{"id": q["id"], "question": q["question"], "hops": q["hops"]} for q in QUESTIONS])
    (HERE / "rules").mkdir(exist_ok=True)
    for name, rules in forge_rules().items():
        write_json(HERE / "rules" / name, rules)
    write_json(HERE / "forge_config.json", forge_config())
    # mini.jsonl is the forge output on this fixture; run rules follow it.
    mini = HERE / "mini.jsonl"
    if mini.exists():
        instances = [json.loads(l) for l in mini.read_text(encoding="utf-8").splitlines() if l.strip()]
        for name, rules in run_rules(instances).items():
            write_json(HERE / "rules" / name, rules)
        write_json(HERE / "run_config.json", run_config())


if __name__ == "__main__":
    main()
