"""Minimal DTD validation for the shipped annotation-block schemas.

Supports the declaration subset those DTDs use: element content models
(sequences with ?/*/+ occurrence), EMPTY, (#PCDATA), and ATTLIST with CDATA
or enumerated attribute types and #REQUIRED/#IMPLIED defaults. Content-model
checking compiles the model into a regular expression over child tag names,
which is exactly the deterministic-automaton semantics of XML 1.0 element
content.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from xml.etree import ElementTree as ET


class DtdError(ValueError):
    """Raised for unparseable DTD text."""


class DtdViolation(ValueError):
    """Raised when an element tree does not conform to a DTD."""

    def __init__(self, element: str, message: str):
        self.element = element
        super().__init__(f"<{element}>: {message}")


_DECL_RE = re.compile(r"<!(ELEMENT|ATTLIST)\s+([^\s>]+)\s+([^>]*)>", re.DOTALL)
_COMMENT_RE = re.compile(r"<!--.*?-->", re.DOTALL)
_ATT_RE = re.compile(
    r"([^\s>]+)\s+(CDATA|\([^)]*\))\s+(#REQUIRED|#IMPLIED|#FIXED\s+\"[^\"]*\"|\"[^\"]*\")",
    re.DOTALL)
_NAME_RE = re.compile(r"[A-Za-z_:][\w.:-]*")


@dataclass(frozen=True)
class AttributeDecl:
    name: str
    values: frozenset[str] | None  # None = CDATA
    required: bool


@dataclass(frozen=True)
class ElementDecl:
    name: str
    model: str                      # raw content model text
    pattern: re.Pattern | None      # None for EMPTY / (#PCDATA)
    pcdata: bool
    empty: bool
    attributes: dict[str, AttributeDecl]


def _structural(text: str) -> str:
    return "".join(ch for ch in text if ch in "()|*+?")


def _model_to_regex(model: str) -> re.Pattern:
    # Children are matched as a comma-terminated tag sequence ("text,es,"),
    # so the content model maps onto a regex by replacing each element name
    # with "(?:name,)" and keeping the grouping/occurrence operators.
    out = []
    pos = 0
    for m in _NAME_RE.finditer(model):
        out.append(_structural(model[pos:m.start()]))
        out.append(f"(?:{re.escape(m.group(0))},)")
        pos = m.end()
    out.append(_structural(model[pos:]))
    return re.compile("".join(out))


class Dtd:
    def __init__(self, text: str):
        self.elements: dict[str, ElementDecl] = {}
        attlists: dict[str, dict[str, AttributeDecl]] = {}
        stripped = _COMMENT_RE.sub("", text)
        for kind, name, body in _DECL_RE.findall(stripped):
            body = body.strip()
            if kind == "ELEMENT":
                empty = body == "EMPTY"
                pcdata = body == "(#PCDATA)"
                pattern = None if (empty or pcdata) else _model_to_regex(body)
                self.elements[name] = ElementDecl(
                    name, body, pattern, pcdata, empty, attributes={})
            else:
                decls = attlists.setdefault(name, {})
                for att_name, att_type, default in _ATT_RE.findall(body):
                    values = None
                    if att_type.startswith("("):
                        values = frozenset(
                            v.strip() for v in att_type[1:-1].split("|"))
                    decls[att_name] = AttributeDecl(
                        att_name, values, default == "#REQUIRED")
        if not self.elements:
            raise DtdError("no element declarations found")
        for name, decls in attlists.items():
            if name not in self.elements:
                raise DtdError(f"ATTLIST for undeclared element {name}")
            self.elements[name].attributes.update(decls)

    def validate(self, element: ET.Element) -> None:
        """Validate element (and descendants) against the declarations.

        Raises DtdViolation naming the offending element.
        """
        decl = self.elements.get(element.tag)
        if decl is None:
            raise DtdViolation(element.tag, "element not declared")
        self._check_attributes(element, decl)
        children = list(element)
        if decl.empty:
            if children or (element.text or "").strip():
                raise DtdViolation(element.tag, "declared EMPTY but has content")
        elif decl.pcdata:
            if children:
                raise DtdViolation(
                    element.tag, f"only character data allowed, found <{children[0].tag}>")
        else:
            texts = [element.text or ""] + [(c.tail or "") for c in children]
            if any(t.strip() for t in texts):
                raise DtdViolation(element.tag, "character data not allowed here")
            sequence = "".join(c.tag + "," for c in children)
            if not decl.pattern.fullmatch(sequence):
                raise DtdViolation(
                    element.tag,
                    f"children ({sequence.rstrip(',') or 'none'}) do not match {decl.model}")
        for child in children:
            self.validate(child)

    def _check_attributes(self, element: ET.Element, decl: ElementDecl) -> None:
        for att in decl.attributes.values():
            if att.name in element.attrib:
                value = element.attrib[att.name]
                if att.values is not None and value not in att.values:
                    raise DtdViolation(
                        element.tag,
                        f"attribute {att.name}={value!r} not in {sorted(att.values)}")
            elif att.required:
                raise DtdViolation(element.tag, f"missing required attribute {att.name}")
        for present in element.attrib:
            if present not in decl.attributes:
                raise DtdViolation(element.tag, f"undeclared attribute {present}")
