const path = require('path');

function nativeBinary() {
  return path.join(__dirname, 'bin', 'imgfast-native');
}

function resize(opts) {
  return { width: opts.width, height: opts.height, engine: nativeBinary() };
}

module.exports = { resize: resize, nativeBinary: nativeBinary };
