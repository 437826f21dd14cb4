function leftPad(str, len, ch) {
  ch = ch || ' ';
  let out = String(str);
  while (out.length < len) {
    out = ch + out;
  }
  return out;
}

module.exports = leftPad;
