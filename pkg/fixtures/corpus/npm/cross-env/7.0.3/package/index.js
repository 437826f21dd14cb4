function parsePair(pair) {
  const idx = pair.indexOf('=');
  return [pair.slice(0, idx), pair.slice(idx + 1)];
}

module.exports = { parsePair: parsePair };
