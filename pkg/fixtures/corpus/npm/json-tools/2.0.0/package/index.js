function tryParse(text, fallback) {
  try {
    return JSON.parse(text);
  } catch (err) {
    return fallback;
  }
}

module.exports = { tryParse: tryParse };
