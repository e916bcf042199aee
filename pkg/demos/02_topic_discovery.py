"""Walkthrough: discover topics and pick the topic count by coherence.

Synthesizes posts around four themes, sweeps a k grid, prints the coherence
curve, and shows each selected topic's top terms and members, ending with
the JSON export that feeds downstream consumers.
"""

import json
import random

from crisisbrief import Post, export_topic_clusters, select_topic_count

THEMES = {
    "evacuation": ["evacuation", "routes", "traffic", "gridlock", "escape", "orders"],
    "shelter": ["shelter", "evacuees", "fairgrounds", "cots", "capacity", "volunteers"],
    "damage": ["homes", "destroyed", "ashes", "structures", "ruins", "burned"],
    "relief": ["donations", "relief", "supplies", "fund", "drive", "generosity"],
}


def synthesize(posts_per_theme: int = 25, seed: int = 5) -> list[Post]:
    rng = random.Random(seed)
    posts = []
    for theme, vocabulary in THEMES.items():
        for i in range(posts_per_theme):
            words = list(vocabulary)
            rng.shuffle(words)
            words += rng.choices(vocabulary, k=rng.randrange(0, 3))
            posts.append(Post(f"{theme}{i:02d}", " ".join(words)))
    rng.shuffle(posts)
    return posts


def main() -> None:
    posts = synthesize()
    curve, model = select_topic_count(posts, k_grid=list(range(2, 9)), seed=3)

    print("coherence curve:")
    for k, cv in curve.points:
        marker = "  <- selected" if k == curve.selected_k else ""
        print(f"  k={k}: CV={cv:+.4f}{marker}")

    print(f"\nselected {model.k} topics:")
    export = export_topic_clusters(model)
    for topic in export["topics"]:
        terms = ", ".join(t["term"] for t in topic["terms"][:3])
        print(f"  {topic['label']}: [{terms}] ({topic['size']} posts)")

    print("\nexport document (truncated):")
    blob = json.dumps(export)[:300]
    print(f"  {blob}...")


if __name__ == "__main__":
    main()
