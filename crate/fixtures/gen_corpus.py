#!/usr/bin/env python3
"""Regenerates fixtures/corpus: 200 short encyclopedia-style documents.

Deterministic (fixed seed). Run from the repository root:

    python3 fixtures/gen_corpus.py
"""
import os
import random

TOPICS = {
    "queen": [
        "Queen are a British rock band formed in London in 1970.",
        "Brian May is the lead guitarist of Queen and wrote many of its songs.",
        "Freddie Mercury was the lead singer of Queen until 1991.",
        "The Queen concert at Wembley Stadium in 1986 drew a crowd of 72,000.",
        "Rock music from the 1970s shaped the sound of Queen.",
        "Brian May built his own guitar with his father.",
        "Freddie Mercury and Brian May performed at Live Aid in London.",
        "Many critics call Queen one of the greatest live acts in rock music.",
        "Brian May holds a doctorate in astrophysics.",
        "The guitar solo became a signature of rock music.",
    ],
    "festival": [
        "A music festival is a community event featuring live performances.",
        "London hosts dozens of summer music festivals each year.",
        "Hyde Park in London is a popular venue for open air concerts.",
        "The One Love festival celebrates reggae and soul music.",
        "Americana is a genre rooted in folk, country and blues.",
        "Several Americana artists headline the music festival in Hyde Park.",
        "Tickets for concerts in Hyde Park often sell out within hours.",
        "The One Love festival moved to a new site outside London in 2018.",
        "Country and Americana acts attract large crowds at British festivals.",
        "Summer concerts in London draw visitors from across the United Kingdom.",
    ],
    "museum": [
        "The British Museum in London is dedicated to human history and culture.",
        "Tate Modern is a museum of modern and contemporary art in London.",
        "The National Gallery houses a collection of over 2,300 paintings.",
        "Admission to the British Museum and the National Gallery is free.",
        "Tate Modern occupies a former power station on the River Thames.",
        "The National Gallery stands on Trafalgar Square in London.",
        "An art museum preserves and displays works of art.",
        "Visitors to London often combine the British Museum with Tate Modern.",
        "The painting collection of the National Gallery spans seven centuries.",
        "The River Thames flows through central London.",
    ],
    "science": [
        "Computer science studies computation and information.",
        "Information retrieval is the science of searching for documents.",
        "A search engine indexes documents for information retrieval.",
        "Knowledge graphs represent entities and the relations between them.",
        "Astrophysics applies physics to astronomical objects.",
        "Many universities in the United Kingdom teach computer science.",
        "Statistics and probability underpin modern machine learning.",
        "Entity linking maps text mentions to entries in a knowledge base.",
    ],
    "geography": [
        "The United Kingdom consists of England, Scotland, Wales and Northern Ireland.",
        "Hannover is a city in Lower Saxony in northern Germany.",
        "Beijing is the capital of China.",
        "Shanghai is a global financial centre on the Yangtze delta.",
        "Ann Arbor is a city in the state of Michigan.",
        "Rivers such as the Rhine and the Thames carried trade for centuries.",
        "Parks and gardens cover a large share of central London.",
        "Tourism is a major industry in many European capitals.",
    ],
}

WEIGHTS = [("queen", 40), ("festival", 45), ("museum", 45), ("science", 35), ("geography", 35)]


def main():
    rng = random.Random(20180708)
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus")
    os.makedirs(out, exist_ok=True)
    for f in os.listdir(out):
        if f.endswith(".txt"):
            os.remove(os.path.join(out, f))
    n = 0
    for topic, count in WEIGHTS:
        others = [t for t, _ in WEIGHTS if t != topic]
        for _ in range(count):
            sentences = rng.sample(TOPICS[topic], rng.randint(2, 5))
            if rng.random() < 0.35:
                sentences.append(rng.choice(TOPICS[rng.choice(others)]))
            rng.shuffle(sentences)
            n += 1
            with open(os.path.join(out, f"doc{n:03d}.txt"), "w", encoding="utf-8") as fh:
                fh.write(" ".join(sentences) + "\n")
    assert n == 200


if __name__ == "__main__":
    main()
