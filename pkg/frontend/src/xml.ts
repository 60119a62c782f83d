/**
 * Results XML parsing. The schema is the gateway's bit-exact contract:
 *
 *   <results query=".." total="N">
 *     <article id="1" keywords="t1,t2" title=".." date="..">BODY</article>
 *   </results>
 *
 * `id` is the 1-based rank and must run 1..total. The parser is injected so
 * the same code runs on the browser DOMParser and on xmldom in tests.
 */

export interface ArticleEntry {
  id: number;
  keywords: string[];
  title: string;
  date: string;
  body: string;
}

export interface ResultsDoc {
  query: string;
  total: number;
  entries: ArticleEntry[];
}

export interface DomParserLike {
  parseFromString(source: string, mimeType: string): unknown;
}

export class XmlSchemaError extends Error {}

interface ElementLike {
  nodeType: number;
  tagName?: string;
  textContent: string | null;
  childNodes: ArrayLike<ElementLike>;
  getAttribute?(name: string): string | null;
}

const ELEMENT_NODE = 1;

function elementChildren(node: ElementLike): ElementLike[] {
  const out: ElementLike[] = [];
  for (let i = 0; i < node.childNodes.length; i++) {
    const child = node.childNodes[i];
    if (child && child.nodeType === ELEMENT_NODE) {
      out.push(child);
    }
  }
  return out;
}

function requireAttr(element: ElementLike, name: string, where: string): string {
  const value = element.getAttribute?.(name);
  if (value === null || value === undefined) {
    throw new XmlSchemaError(`${where}: missing '${name}' attribute`);
  }
  return value;
}

export function parseResultsXml(source: string, parser: DomParserLike): ResultsDoc {
  let doc: { documentElement: ElementLike | null };
  try {
    doc = parser.parseFromString(source, "application/xml") as {
      documentElement: ElementLike | null;
    };
  } catch (err) {
    throw new XmlSchemaError(`malformed XML: ${String(err)}`);
  }
  const root = doc.documentElement;
  if (!root) {
    throw new XmlSchemaError("malformed XML: no document element");
  }
  // browsers report parse failures as an embedded <parsererror> element
  if (root.tagName === "parsererror" || elementChildren(root).some((c) => c.tagName === "parsererror")) {
    throw new XmlSchemaError("malformed XML");
  }
  if (root.tagName !== "results") {
    throw new XmlSchemaError(`root element is <${root.tagName}>, expected <results>`);
  }
  const query = requireAttr(root, "query", "results");
  const totalRaw = requireAttr(root, "total", "results");
  const total = Number(totalRaw);
  if (!Number.isInteger(total) || total < 0) {
    throw new XmlSchemaError(`total is not a non-negative integer: '${totalRaw}'`);
  }

  const entries: ArticleEntry[] = [];
  const children = elementChildren(root);
  children.forEach((element, i) => {
    const where = `article element ${i}`;
    if (element.tagName !== "article") {
      throw new XmlSchemaError(`${where}: unexpected <${element.tagName}>`);
    }
    const idRaw = requireAttr(element, "id", where);
    const id = Number(idRaw);
    if (!Number.isInteger(id)) {
      throw new XmlSchemaError(`${where}: id is not an integer`);
    }
    const keywordsRaw = requireAttr(element, "keywords", where);
    entries.push({
      id,
      keywords: keywordsRaw === "" ? [] : keywordsRaw.split(","),
      title: requireAttr(element, "title", where),
      date: requireAttr(element, "date", where),
      body: element.textContent ?? "",
    });
  });

  if (entries.length !== total) {
    throw new XmlSchemaError(`total=${total} but ${entries.length} article elements`);
  }
  entries.forEach((entry, i) => {
    if (entry.id !== i + 1) {
      throw new XmlSchemaError(
        `article ids must be contiguous 1..${total}, element ${i} has id ${entry.id}`,
      );
    }
  });
  return { query, total, entries };
}
