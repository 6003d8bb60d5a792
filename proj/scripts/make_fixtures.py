#!/usr/bin/env python3
"""Regenerates the bundled test corpora under tests/fixtures/.

The output is deterministic (fixed seed); rerun after editing the
vocabulary and commit the result.
"""
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

SYMPTOMS = ["fever", "cough", "headache", "headaches", "nausea", "fatigue", "rash", "rashes",
            "dizziness", "insomnia", "chills", "cramps", "migraine", "migraines", "sore throat"]
CONDITIONS = ["diabetes", "asthma", "cancer", "flu", "covid-19", "pneumonia", "bronchitis",
              "infection", "infections", "disease", "diseases", "heart disease", "arthritis",
              "hypertension", "depression", "anxiety", "illness", "illnesses", "allergy", "allergies"]
STDS = ["hiv", "syphilis", "herpes", "gonorrhea", "chlamydia"]
MEDS = ["ibuprofen", "aspirin", "antibiotics", "antibiotic", "insulin", "paracetamol", "statins",
        "antihistamines", "antihistamine", "inhaler", "inhalers", "vitamin", "vitamins", "pill", "pills"]
BODY = ["arm", "arms", "knee", "knees", "stomach", "shoulder", "shoulders", "chest", "back",
        "head", "throat", "skin", "leg", "legs", "eye", "eyes"]
PEOPLE = ["doctor", "doctors", "nurse", "nurses", "pharmacist", "son", "daughter", "wife",
          "husband", "mother", "father", "grandmother"]
TIMES = ["days", "weeks", "months", "hours", "years"]

TEMPLATES = [
    "I have had {symptom} and {symptom2} for {n} {time}.",
    "My {person} says my {body} pain could be {condition}.",
    "Can {med} help with {symptom}?",
    "Is {std} contagious through {body} contact?",
    "My {person} was diagnosed with {condition} {n} {time} ago.",
    "Should I take {med} or {med2} for my {condition}?",
    "What are the early signs of {condition} and {condition2}?",
    "I get {symptom} in my {body} after taking {med}.",
    "How is {std} treated, and does it cause {symptom}?",
    "My {body} hurts and I think it is {condition}.",
    "The {person} recommended {n} mg of {med} twice a day.",
    "Can {condition} cause {symptom} in the {body}?",
    "I tested positive for {std} and I am worried about {condition}.",
    "Does {med} interact with {med2}?",
    "My {person} has {symptom} and a swollen {body}.",
]


def fill(rng, template):
    values = {
        "symptom": rng.choice(SYMPTOMS),
        "symptom2": rng.choice(SYMPTOMS),
        "condition": rng.choice(CONDITIONS),
        "condition2": rng.choice(CONDITIONS),
        "std": rng.choice(STDS),
        "med": rng.choice(MEDS),
        "med2": rng.choice(MEDS),
        "body": rng.choice(BODY),
        "person": rng.choice(PEOPLE),
        "time": rng.choice(TIMES),
        "n": str(rng.choice([2, 3, 5, 10, 20, 50, 100, 250])),
    }
    return template.format(**values)


def medical_corpus(n=500, seed=20231):
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        text = fill(rng, rng.choice(TEMPLATES))
        if text[0].islower():
            text = text[0].upper() + text[1:]
        rows.append({"id": i, "text": text})
    return rows


def nested_corpus():
    # Three groups of string-similar entities. Under the stub embedding a
    # tight sub-group forms at a low cutoff and the wider group at a higher
    # one, so shared members end up in more than one histogram.
    groups = [
        ["migraine", "migraines", "migrainous", "migraine-like"],
        ["vaccine", "vaccines", "vaccination", "vaccinations"],
        ["insulin", "insulins", "insulinoma", "insulin-pump"],
    ]
    rows = []
    for group in groups:
        for word in group:
            for k in range(3):
                rows.append({"text": f"patient reports {word} case {k}"})
    return rows


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    ROOT.mkdir(parents=True, exist_ok=True)
    write_jsonl(ROOT / "medical_chat_500.jsonl", medical_corpus())
    write_jsonl(ROOT / "nested_groups.jsonl", nested_corpus())
