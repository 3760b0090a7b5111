#!/usr/bin/env python3
# Copyright 2026 The decode_lab Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the demo corpus: original template-generated prose, one document per line.

The output is dedicated to the public domain (CC0). Generation is seeded, so
re-running the script reproduces data/demo_corpus.txt byte for byte.
"""

import argparse
import random

PEOPLE = ["farmer", "baker", "sailor", "teacher", "doctor", "painter", "miller", "weaver",
          "fisherman", "carpenter", "gardener", "merchant", "shepherd", "student", "traveler",
          "soldier", "poet", "clerk", "widow", "child", "boy", "girl", "old man", "old woman",
          "stranger", "neighbor", "captain", "priest", "smith", "hunter"]
ANIMALS = ["dog", "cat", "horse", "fox", "crow", "goat", "sheep", "owl", "mule", "hound",
           "rabbit", "deer", "cow", "hen", "goose"]
PLACES = ["village", "harbor", "market", "forest", "river", "hill", "valley", "road", "bridge",
          "church", "mill", "field", "garden", "kitchen", "library", "station", "inn", "farm",
          "shore", "meadow", "town", "square", "orchard", "cellar", "school"]
THINGS = ["letter", "lantern", "basket", "boat", "book", "bell", "coat", "map", "key", "cart",
          "loaf", "kettle", "candle", "rope", "ladder", "net", "hat", "clock", "jar", "chair",
          "table", "window", "door", "fence", "well", "stone", "apple", "song", "story", "coin"]
ADJS = ["old", "young", "quiet", "tired", "small", "large", "bright", "dark", "cold", "warm",
        "green", "red", "heavy", "empty", "broken", "wooden", "narrow", "wide", "gentle", "proud",
        "careful", "curious", "hungry", "patient", "silent", "busy", "strange", "simple", "long",
        "new"]
TIMES = ["in the morning", "at dawn", "at noon", "in the evening", "at night", "after supper",
         "before the storm", "during the winter", "in early spring", "on market day",
         "late in the autumn", "on sunday", "after the rain", "when the bells rang"]
WEATHER = ["the wind rose over the hills", "rain fell on the roofs", "snow covered the fields",
           "the sun warmed the stones", "fog lay along the river", "the sky turned grey",
           "a storm came from the sea", "the air was still and cold", "thunder rolled far away",
           "the frost made the grass white"]
VERBS_T = ["carried", "found", "lost", "opened", "mended", "painted", "sold", "bought", "watched",
           "followed", "cleaned", "brought", "hid", "dropped", "lifted", "counted", "read",
           "wrote", "built", "pulled", "pushed", "filled", "emptied", "kept", "gave away"]
VERBS_I = ["walked", "waited", "slept", "laughed", "sang", "worked", "rested", "listened",
           "wandered", "hurried", "stopped", "returned", "smiled", "wept", "prayed", "danced",
           "whistled", "shivered", "stayed", "left"]
PREPS = ["near", "behind", "beside", "across", "under", "over", "along", "toward", "past",
         "inside", "outside", "around"]
FEELINGS = ["glad", "afraid", "tired", "hopeful", "lonely", "content", "restless", "worried",
            "calm", "surprised"]
THOUGHTS = ["the harvest would be good", "the road was too long", "the river would flood",
            "a letter would come soon", "the winter would be hard", "nobody would remember",
            "the old bridge would hold", "the market would be busy", "the boat was ready",
            "the story was true", "the bells meant good news", "the stranger would return"]
SAYINGS = ["we should go home", "the bread is ready", "the tide is turning",
           "the horse needs water", "the lamp is out", "the door is open", "the sheep are lost",
           "the path is clear", "the bell is ringing", "the garden needs rain"]


def det(rng, noun):
    return rng.choice(["the", "the", "a", "an" if noun[0] in "aeiou" else "a", "every", "one"])


def noun_phrase(rng, pool):
    noun = rng.choice(pool)
    if rng.random() < 0.45:
        adj = rng.choice(ADJS)
        return f"{det(rng, adj)} {adj} {noun}"
    return f"{det(rng, noun)} {noun}"


def person(rng):
    return noun_phrase(rng, PEOPLE)


def place(rng):
    return f"the {rng.choice(ADJS) + ' ' if rng.random() < 0.3 else ''}{rng.choice(PLACES)}"


def thing(rng):
    return noun_phrase(rng, THINGS)


def sentence(rng):
    kind = rng.randrange(12)
    if kind == 0:
        return f"{rng.choice(TIMES)} , {person(rng)} {rng.choice(VERBS_I)} {rng.choice(PREPS)} {place(rng)} ."
    if kind == 1:
        return f"{person(rng)} {rng.choice(VERBS_T)} {thing(rng)} {rng.choice(PREPS)} {place(rng)} ."
    if kind == 2:
        return f"{rng.choice(WEATHER)} , and {person(rng)} {rng.choice(VERBS_I)} ."
    if kind == 3:
        return f"{person(rng)} was {rng.choice(FEELINGS)} because {rng.choice(THOUGHTS)} ."
    if kind == 4:
        return f"\" {rng.choice(SAYINGS)} , \" said {person(rng)} ."
    if kind == 5:
        return f"{noun_phrase(rng, ANIMALS)} {rng.choice(VERBS_I)} {rng.choice(PREPS)} {place(rng)} {rng.choice(TIMES)} ."
    if kind == 6:
        return f"{person(rng)} and {noun_phrase(rng, ANIMALS)} {rng.choice(VERBS_I)} until {rng.choice(WEATHER)} ."
    if kind == 7:
        return f"there was {thing(rng)} {rng.choice(PREPS)} {place(rng)} , and nobody knew who {rng.choice(VERBS_T)} it ."
    if kind == 8:
        return f"{person(rng)} thought that {rng.choice(THOUGHTS)} , so {rng.choice(['she', 'he', 'they'])} {rng.choice(VERBS_I)} ."
    if kind == 9:
        return f"{rng.choice(TIMES)} the {rng.choice(PLACES)} was {rng.choice(ADJS)} and {rng.choice(ADJS)} ."
    if kind == 10:
        return f"{person(rng)} {rng.choice(VERBS_T)} {thing(rng)} and {rng.choice(VERBS_T)} {thing(rng)} ."
    return f"when {person(rng)} {rng.choice(VERBS_I)} , {person(rng)} {rng.choice(VERBS_T)} {thing(rng)} ."


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/demo_corpus.txt")
    ap.add_argument("--bytes", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=20261015)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    size = 0
    with open(args.out, "w", encoding="utf-8") as out:
        while size < args.bytes:
            doc = " ".join(sentence(rng) for _ in range(rng.randint(2, 5)))
            out.write(doc + "\n")
            size += len(doc) + 1


if __name__ == "__main__":
    main()
