"""Regenerates the *.txt expectations with Python's html.parser.

Text inside <code>/<pre> is dropped, block-level tags separate words, inline
tags do not, and the result is whitespace-collapsed.
"""
import glob
import re
from html.parser import HTMLParser

CODE = {"code", "pre"}
INLINE = {"a", "abbr", "b", "del", "em", "i", "ins", "kbd", "s", "small", "span", "strike", "strong", "sub", "sup", "u"}


class Text(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.stack = []
        self.out = []

    def handle_starttag(self, tag, attrs):
        if self.stack:
            if tag in CODE:
                self.stack.append(tag)
            return
        if tag in CODE:
            self.stack.append(tag)
            self.out.append(" ")
        elif tag not in INLINE:
            self.out.append(" ")

    def handle_startendtag(self, tag, attrs):
        if not self.stack and tag not in INLINE:
            self.out.append(" ")

    def handle_endtag(self, tag):
        if self.stack:
            if tag in self.stack:
                del self.stack[len(self.stack) - 1 - self.stack[::-1].index(tag):]
            return
        if tag not in INLINE:
            self.out.append(" ")

    def handle_data(self, data):
        if not self.stack:
            self.out.append(data)


for path in sorted(glob.glob("*.html")):
    p = Text()
    p.feed(open(path).read())
    p.close()
    words = [w for w in re.split(r"[\s<>]+", "".join(p.out)) if w]
    open(path[:-5] + ".txt", "w").write(" ".join(words) + "\n")
