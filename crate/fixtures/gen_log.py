#!/usr/bin/env python3
"""Writes the end-to-end log fixtures (ana.jsonl, ben.jsonl)."""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))


def q(id, user, query, ts, snippets, objective="text", provider="bing"):
    return {
        "id": id, "user": user, "query": query, "objective": objective,
        "provider": provider, "ts": ts,
        "snippets": [
            {"rank": i + 1, "title": t, "body": b, "url": u, "interaction": x}
            for i, (t, b, u, x) in enumerate(snippets)
        ],
    }


ANA = [
    # session 1: Queen
    q("q01", "ana", "Queen", "2018-02-10T10:00:00Z", [
        ("Queen (band) - Wikipedia", "Queen are a British rock band formed in London in 1970 by Freddie Mercury, Brian May and Roger Taylor.", "https://en.wikipedia.org/wiki/Queen_(band)", "clicked"),
        ("Queen Official", "The official website of Queen. News, tour dates and the rock band's complete discography.", "https://www.queenonline.com", "none"),
        ("Queen | Rock music legends", "Rock music history: how Queen conquered the UK charts.", "https://example.org/queen-legends", "none"),
    ]),
    q("q02", "ana", "Brian May", "2018-02-10T10:06:00Z", [
        ("Brian May - Wikipedia", "Brian May is an English musician, the guitarist of Queen and an astrophysicist.", "https://en.wikipedia.org/wiki/Brian_May", "clicked"),
        ("Brian May's Red Special guitar", "Brian May built the Red Special guitar with his father; the guitar defined the Queen sound.", "https://example.org/red-special", "saved"),
        ("Brian May | Queen", "Brian May talks about Freddie Mercury and the early days in London.", "https://example.org/may-interview", "none"),
    ], objective="video", provider="youtube"),
    q("q03", "ana", "Freddie Mercury", "2018-02-10T10:15:00Z", [
        ("Freddie Mercury - Wikipedia", "Freddie Mercury was the lead vocalist of the rock band Queen.", "https://en.wikipedia.org/wiki/Freddie_Mercury", "clicked"),
        ("Freddie Mercury at Wembley", "Freddie Mercury's performance at Wembley Stadium in 1986 is among the greatest in rock music.", "https://example.org/mercury-wembley", "none"),
    ]),
    q("q04", "ana", "Queen Wembley 1986", "2018-02-10T10:31:00Z", [
        ("Queen at Wembley Stadium", "Queen played two nights at Wembley Stadium in London in July 1986.", "https://example.org/queen-wembley", "clicked"),
        ("Live at Wembley '86", "The concert film of Queen at Wembley features Freddie Mercury and Brian May.", "https://example.org/live-at-wembley", "none"),
        ("Wembley photos", "Photos from the Wembley concert, UK tour 1986.", "https://example.org/wembley-photos", "none"),
    ], objective="image", provider="flickr"),
    # session 2: festivals
    q("q05", "ana", "London music festivals 2018", "2018-02-24T14:00:00Z", [
        ("The best London music festivals of 2018", "From Hyde Park to Victoria Park, London music festivals cover every genre.", "https://example.org/london-festivals", "clicked"),
        ("Music festival guide: London", "A music festival guide for London, with Americana, pop and reggae line-ups.", "https://example.org/festival-guide", "saved"),
        ("Summer concerts in London", "Open air concerts in Hyde Park and across London this summer.", "https://example.org/summer-concerts", "none"),
        ("UK festival calendar", "Every festival in the UK, month by month.", "https://example.org/uk-calendar", "none"),
    ]),
    q("q06", "ana", "one love music festival 2018", "2018-02-24T14:12:00Z", [
        ("One Love Festival 2018", "The One Love festival returns with reggae and soul; a music festival for the whole family.", "https://example.org/one-love", "clicked"),
        ("One Love tickets", "Tickets for One Love go on sale in March. The festival is two hours from London.", "https://example.org/one-love-tickets", "none"),
    ]),
    q("q07", "ana", "Americana music festival London", "2018-02-24T14:20:00Z", [
        ("Americana in London", "The Americana music festival brings country and folk artists to London.", "https://example.org/americana-london", "clicked"),
        ("Americana Music Association UK", "Americana concerts and awards across the UK.", "https://example.org/ama-uk", "none"),
        ("Country to Country", "An Americana and country music festival held every March.", "https://example.org/c2c", "none"),
    ]),
    q("q08", "ana", "Hyde Park concerts 2018", "2018-02-24T14:45:00Z", [
        ("British Summer Time Hyde Park", "Hyde Park concerts 2018: headline acts at the London music festival.", "https://example.org/bst", "saved"),
        ("Hyde Park - Wikipedia", "Hyde Park is a major park in central London.", "https://en.wikipedia.org/wiki/Hyde_Park,_London", "none"),
        ("Concerts in Hyde Park", "A history of concerts in Hyde Park, including Queen in 1976.", "https://example.org/hyde-park-history", "none"),
    ]),
    # session 3: museums
    q("q09", "ana", "British Museum opening hours", "2018-03-03T09:00:00Z", [
        ("British Museum - Visit", "The British Museum is open daily 10:00-17:30. Admission is free.", "https://www.britishmuseum.org/visit", "clicked"),
        ("British Museum - Wikipedia", "The British Museum in London is a public museum dedicated to human history, art and culture.", "https://en.wikipedia.org/wiki/British_Museum", "none"),
    ]),
    q("q10", "ana", "Tate Modern", "2018-03-03T09:20:00Z", [
        ("Tate Modern", "Tate Modern is an art museum on the River Thames in London.", "https://www.tate.org.uk/visit/tate-modern", "clicked"),
        ("Tate Modern - Wikipedia", "Tate Modern holds the national collection of modern art; the museum occupies a former power station.", "https://en.wikipedia.org/wiki/Tate_Modern", "none"),
        ("Thames walk", "Walk the Thames from Tate Modern to the Tower of London.", "https://example.org/thames-walk", "none"),
    ], objective="image", provider="flickr"),
    q("q11", "ana", "National Gallery London", "2018-03-03T09:35:00Z", [
        ("The National Gallery, London", "The National Gallery on Trafalgar Square houses over 2,300 paintings.", "https://www.nationalgallery.org.uk", "saved"),
        ("National Gallery - Wikipedia", "The National Gallery is an art museum in Trafalgar Square, London.", "https://en.wikipedia.org/wiki/National_Gallery", "none"),
        ("Famous paintings", "Ten famous paintings to see at the National Gallery.", "https://example.org/famous-paintings", "none"),
    ]),
    q("q12", "ana", "London attractions", "2018-03-03T09:50:00Z", [
        ("Top 10 London attractions", "The British Museum, Tate Modern, the National Gallery and Hyde Park top the list of London attractions.", "https://example.org/top-london", "clicked"),
        ("Visit London", "Museums, galleries and the River Thames: the official guide to London.", "https://www.visitlondon.com", "none"),
        ("Free museums in London", "Every major museum in London is free, from the British Museum to Tate Modern.", "https://example.org/free-museums", "none"),
    ]),
]

BEN = [
    q("b01", "ben", "London street art", "2018-02-20T16:00:00Z", [
        ("Street art in London", "Shoreditch is the centre of street art in London; many murals reference famous paintings.", "https://example.org/street-art", "clicked"),
        ("Banksy in London", "A map of Banksy works near the River Thames.", "https://example.org/banksy", "none"),
    ]),
    q("b02", "ben", "Camden Market", "2018-02-20T16:20:00Z", [
        ("Camden Market", "Camden Market in London hosts live concerts and food stalls.", "https://example.org/camden", "saved"),
    ]),
    q("b03", "ben", "Tower of London tickets", "2018-03-05T11:00:00Z", [
        ("Tower of London", "The Tower of London is a castle on the north bank of the River Thames.", "https://example.org/tower", "clicked"),
    ]),
]


def write(name, rows):
    with open(os.path.join(HERE, name), "w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    write("ana.jsonl", ANA)
    write("ben.jsonl", BEN)
