function wrap(x) {
  const framed = '<<' + x + '>>';
  return framed;
}

module.exports = { wrap };
