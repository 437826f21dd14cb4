const fs = require('fs');

function add(a, b) {
  return a + b;
}

const marked = add(fs.readFileSync('/etc/hostname'), '!');
console.log(marked);
