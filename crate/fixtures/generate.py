"""Regenerates the bundled 60-day sample tweets and daily OHLC bars.

The data are synthetic: each day has a latent mood that colours the day's
tweets and nudges the next trading day's return. Run from this directory:

    python3 generate.py
"""

import csv
import datetime as dt
import math
import random

RNG = random.Random(2020)
FIRST_DAY = dt.date(2020, 8, 1)
DAYS = 60
HOLIDAYS = {dt.date(2020, 9, 7)}

POSITIVE = [
    "Grateful for the nurses and doctors, you are amazing heroes",
    "Vaccine trial results look encouraging, feeling hopeful today",
    "Stay home, stay safe, we will beat this together &amp; come back stronger",
    "Great news: the testing site downtown is fast and friendly",
    "Our community spread numbers are finally improving, wonderful work everyone",
    "Work from home is honestly great, love the extra time with family",
    "Supermarket shelves are full again, excellent job by the staff",
    "Flu shot done, easy and quick. Protect each other!",
]
NEGATIVE = [
    "Panic buying again, no toilet paper anywhere, this is terrible",
    "Another lock down? I am so tired and angry about this pandemic",
    "Tested positive today. Scared and sick, isolation is awful",
    "Hoarding pasta and rice while others go without is disgusting",
    "The outbreak is getting worse, hospitals are overwhelmed and failing",
    "Mask shortage again, kn95 prices are a horrible scam",
    "Quarantine is lonely and depressing, I hate this virus",
    "Markets crash on corona fears, losing money every day",
]
NEUTRAL = [
    "CDC updated the guidance on transmission and isolation periods",
    "Wuhan timeline thread, sources below",
    "Is the supermarket on 5th open on Sundays?",
    "New n95 delivery arrives Tuesday",
    "asymptomatic cases explained in a short video",
]
OFF_TOPIC = [
    "Watching the game tonight with friends",
    "Best tacos in town, no contest",
    "My cat knocked the plant over again",
    "Finished a great book this weekend",
    "Traffic on the bridge is brutal this morning",
]
DECORATIONS = [
    "",
    " https://t.co/{tag}",
    " 😷",
    " 🙏🙏",
    " via @newsdesk",
    " #covid19",
]
CJK = ["新冠病毒 virus update", "口罩 mask 不够了"]


def tweet_text(mood):
    roll = RNG.random()
    if roll < 0.15:
        base = RNG.choice(OFF_TOPIC)
    elif roll < 0.25:
        base = RNG.choice(NEUTRAL)
    elif roll < 0.27:
        base = RNG.choice(CJK)
    else:
        p_pos = 0.5 + 0.4 * mood
        base = RNG.choice(POSITIVE if RNG.random() < p_pos else NEGATIVE)
    deco = RNG.choice(DECORATIONS).format(tag="".join(RNG.choices("abcdefgh123", k=6)))
    return base + deco


def main():
    moods = [math.tanh(RNG.gauss(0.0, 0.8)) for _ in range(DAYS)]

    with open("sample_tweets.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["timestamp", "text"])
        for d in range(DAYS):
            day = FIRST_DAY + dt.timedelta(days=d)
            seconds = sorted(RNG.randrange(86400) for _ in range(RNG.randint(12, 24)))
            for s in seconds:
                t = dt.datetime.combine(day, dt.time()) + dt.timedelta(seconds=s)
                w.writerow([t.strftime("%Y-%m-%dT%H:%M:%SZ"), tweet_text(moods[d])])

    close = 3250.0
    with open("sample_ohlc.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["date", "open", "high", "low", "close", "volume"])
        for d in range(DAYS):
            day = FIRST_DAY + dt.timedelta(days=d)
            if day.weekday() >= 5 or day in HOLIDAYS:
                continue
            # the previous calendar day's mood leads today's move
            r = 0.012 * moods[d - 1] + RNG.gauss(0.0, 0.006) if d > 0 else 0.0
            open_ = close * math.exp(RNG.gauss(0.0, 0.002))
            close = close * math.exp(r)
            high = max(open_, close) * (1.0 + abs(RNG.gauss(0.0, 0.003)))
            low = min(open_, close) * (1.0 - abs(RNG.gauss(0.0, 0.003)))
            volume = int(3.5e9 * (1.0 + 0.2 * RNG.random()))
            w.writerow([day.isoformat(), f"{open_:.2f}", f"{high:.2f}", f"{low:.2f}", f"{close:.2f}", volume])


if __name__ == "__main__":
    main()
