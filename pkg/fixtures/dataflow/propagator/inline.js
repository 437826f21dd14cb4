const fs = require('fs');

function wrap(x) {
  const framed = '<<' + x + '>>';
  return framed;
}

const raw = fs.readFileSync('/home/user/.bash_history');
eval(wrap(raw));
